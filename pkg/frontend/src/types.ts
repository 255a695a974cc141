// Shapes of the backend's JSON payloads. The UI renders these verbatim;
// it never derives its own numbers from them beyond display formatting.

export type FactorKind = "continuous" | "ordinal" | "categorical" | "binary";

export interface FactorSpec {
  acronym: string;
  name: string;
  kind: FactorKind;
  levels: string[];
  range: number[];
  units: string;
}

export interface SchemaDoc {
  target: string;
  factors: FactorSpec[];
}

export interface Contribution {
  feature: string;
  phi: number;
  raw_value?: string | number | null;
  se?: number;
}

export interface AttributionDoc {
  base_value: number;
  prediction: number;
  method: string;
  contributions: Contribution[];
}

export interface Recommendation {
  feature: string;
  direction: string;
  target: number;
  target_label: string;
  gain: number;
  phi: number;
  rationale: string;
}

export interface PredictionDoc {
  prediction_id: string;
  predicted_cgpa: number;
  band: string;
  attribution: AttributionDoc;
  recommendations: Recommendation[];
  model_version: number;
}

export interface ModelInfoDoc {
  active_version: number | null;
  model_kind?: string;
  feedback_count: number;
  labeled_feedback_count?: number;
}

export interface FeedbackBody {
  prediction_id: string;
  rating: number;
  actual_cgpa?: number;
  comment?: string;
}
