// Behaviour timeline and explanation feed view-models. Pure projections of
// service payloads: ticks, behaviours, confidences and causality chips are
// copied, never recomputed.

import type { FeedItem } from "./types.js";

// Fixed per-behaviour colours so timelines read the same across missions.
export const BEHAVIOUR_COLOURS: Record<string, string> = {
  wait: "#9e9e9e",
  transit: "#1976d2",
  survey: "#2e7d32",
  hold_position: "#f9a825",
  replanned_transit: "#7b1fa2",
  avoid_obstacle: "#d32f2f",
};

export interface TimelineSegment {
  vessel: string;
  startTick: number;
  endTick: number; // exclusive; extended when the next entry arrives
  behaviour: string;
  confidence: number;
  colour: string;
}

export interface FeedCard {
  tick: number;
  vessel: string;
  behaviour: string;
  explanationType: string;
  sentence: string;
  chips: Array<{ feature: string; value: string; weight: number }>;
  confidence: number;
}

export interface TimelineModel {
  segments: TimelineSegment[];
  cards: FeedCard[];
}

export function emptyTimeline(): TimelineModel {
  return { segments: [], cards: [] };
}

// Append one streamed concept set: closes the vessel's open segment at the
// new tick and starts the next one, and adds a feed card.
export function appendToTimeline(model: TimelineModel, item: FeedItem): TimelineModel {
  const { entry, sentence } = item;
  const segments = model.segments.slice();
  for (let i = segments.length - 1; i >= 0; i -= 1) {
    if (segments[i].vessel === entry.vessel) {
      if (segments[i].endTick <= entry.time.tick) {
        segments[i] = { ...segments[i], endTick: entry.time.tick };
      }
      break;
    }
  }
  segments.push({
    vessel: entry.vessel,
    startTick: entry.time.tick,
    endTick: entry.time.tick + 1,
    behaviour: entry.behaviour,
    confidence: entry.confidence,
    colour: BEHAVIOUR_COLOURS[entry.behaviour] ?? "#000000",
  });
  const cards = model.cards.concat([
    {
      tick: entry.time.tick,
      vessel: entry.vessel,
      behaviour: entry.behaviour,
      explanationType: entry.explanation_type,
      sentence,
      chips: entry.causality.map((cause) => ({
        feature: cause.feature,
        value: cause.value,
        weight: cause.weight,
      })),
      confidence: entry.confidence,
    },
  ]);
  return { segments, cards };
}

export function buildTimeline(feed: FeedItem[]): TimelineModel {
  let model = emptyTimeline();
  for (const item of feed) {
    model = appendToTimeline(model, item);
  }
  return model;
}
