// Interactive what-if panel: five feature selectors seeded from the latest
// live state, a round trip through POST /whatif, and a "pin" action that
// makes the edited state the base for the operator's next query.

import { attributionBars, type AttributionBar } from "./attribution.js";
import type { ServiceClient } from "./client.js";
import type {
  FeatureName,
  StateTokens,
  VocabularyPayload,
  WhatifResponse,
} from "./types.js";

export interface WhatifRendering {
  badge: { behaviour: string; changed: boolean; confidence: number };
  bars: AttributionBar[];
  sentence: string;
}

export interface SelectorModel {
  name: string;
  options: string[];
  selected: string;
}

export class WhatIfPanel {
  selectors: SelectorModel[] = [];
  baseState: StateTokens;
  lastResult: WhatifResponse | null = null;
  lastError: string | null = null;

  constructor(
    private readonly client: ServiceClient,
    vocabulary: VocabularyPayload,
    seedState: StateTokens,
    public vessel: string = "vehicle",
  ) {
    this.baseState = { ...seedState };
    this.selectors = vocabulary.features.map((feature) => ({
      name: feature.name,
      options: feature.values.slice(),
      selected: seedState[feature.name as FeatureName],
    }));
  }

  // Selected values that differ from the base state form the edit set;
  // invalid input is unrepresentable because options come from /vocabulary.
  edits(): Partial<StateTokens> {
    const edits: Record<string, string> = {};
    for (const selector of this.selectors) {
      if (this.baseState[selector.name as FeatureName] !== selector.selected) {
        edits[selector.name] = selector.selected;
      }
    }
    return edits;
  }

  select(feature: string, value: string): void {
    const selector = this.selectors.find((s) => s.name === feature);
    if (!selector) throw new Error(`unknown feature ${feature}`);
    if (!selector.options.includes(value)) {
      throw new Error(`value ${value} is not in the ${feature} domain`);
    }
    selector.selected = value;
  }

  async submit(): Promise<WhatifRendering> {
    this.lastError = null;
    try {
      this.lastResult = await this.client.whatif({
        state: this.baseState,
        edits: this.edits(),
        vessel: this.vessel,
      });
    } catch (error) {
      this.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    }
    return renderWhatif(this.lastResult);
  }

  // Pin the answer: the edited state becomes the next query's base, so the
  // operator can walk the policy one edit at a time.
  pin(): StateTokens {
    if (!this.lastResult) throw new Error("nothing to pin: no what-if result yet");
    this.baseState = { ...this.lastResult.result_state };
    for (const selector of this.selectors) {
      selector.selected = this.baseState[selector.name as FeatureName];
    }
    return this.baseState;
  }
}

export function renderWhatif(result: WhatifResponse): WhatifRendering {
  return {
    badge: {
      behaviour: result.result_prediction.behaviour,
      changed: result.changed,
      confidence: result.result_prediction.confidence,
    },
    bars: attributionBars(result.delta_phi),
    sentence: result.sentence,
  };
}
