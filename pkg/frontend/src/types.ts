// Wire types mirroring the service schemas. The console never invents
// numbers: everything rendered comes from these payloads.

export type StateTokens = {
  ready_plan: string;
  current_objective: string;
  progress_type: string;
  same_objective: string;
  obstacle_found: string;
};

export type FeatureName = keyof StateTokens;

export interface PredictionPayload {
  behaviour: string;
  confidence: number;
  probabilities: Record<string, number>;
}

export interface CausePayload {
  feature: string;
  value: string;
  weight: number;
}

export interface EntryTimePayload {
  mission: string;
  tick: number;
}

export interface KnowledgeEntry {
  vessel: string;
  behaviour: string;
  causality: CausePayload[];
  time: EntryTimePayload;
  explanation_type: string;
  confidence: number;
}

export interface FeedItem {
  entry: KnowledgeEntry;
  sentence: string;
}

export interface AttributionPayload {
  target: string;
  base: number;
  method: string;
  phi: Record<string, number>;
}

export interface ExplainResponse {
  state: StateTokens;
  prediction: PredictionPayload;
  attribution: AttributionPayload;
  causes: CausePayload[];
  weak: boolean;
  sentence: string;
}

export interface WhatifRequest {
  state: StateTokens;
  edits: Partial<StateTokens>;
  vessel?: string;
}

export interface WhatifResponse {
  original_state: StateTokens;
  original_prediction: PredictionPayload;
  edits: Record<string, string>;
  result_state: StateTokens;
  result_prediction: PredictionPayload;
  changed: boolean;
  delta_phi: Record<string, number>;
  sentence: string;
}

export interface VocabularyPayload {
  features: Array<{ name: string; values: string[] }>;
  behaviours: string[];
}

export interface MissionCreated {
  mission_id: string;
  records: number;
  entries: number;
}

export interface MissionState {
  vessel: string;
  tick: number;
  state: StateTokens;
  prediction: PredictionPayload;
}
