// Sign-split attribution bars. Positive contributions (supporting evidence)
// point right; negative ones (counter-evidence) point left. Weights come
// straight from the service payload.

export interface AttributionBar {
  feature: string;
  weight: number;
  direction: "right" | "left";
  // bar length as a fraction of the largest |weight|, for rendering
  magnitude: number;
}

export function attributionBars(phi: Record<string, number>): AttributionBar[] {
  const entries = Object.entries(phi);
  const peak = Math.max(...entries.map(([, weight]) => Math.abs(weight)), Number.MIN_VALUE);
  return entries
    .map(([feature, weight]) => ({
      feature,
      weight,
      direction: weight >= 0 ? ("right" as const) : ("left" as const),
      magnitude: Math.abs(weight) / peak,
    }))
    .sort((a, b) => Math.abs(b.weight) - Math.abs(a.weight));
}

// Signed sum of the displayed bars; the service guarantees this equals
// prediction - base, so the console only checks what it shows.
export function barSum(bars: AttributionBar[]): number {
  return bars.reduce((total, bar) => total + bar.weight, 0);
}
