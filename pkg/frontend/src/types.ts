// Shapes of the annotation API documents (see GET/POST /api/* on the server).

export type GeneralClass =
  | "ArtificialSurfaces"
  | "Agriculture"
  | "Forest"
  | "Water"
  | "OthersUnclassified";

export type SampleStatus =
  | "pending"
  | "partially-annotated"
  | "needs-review"
  | "finalized";

export type ConfidenceLevel = 1 | 2 | 3;

export interface AnnotationDoc {
  expert_id: string;
  label: GeneralClass;
  confidence: number;
  round: number;
  timestamp: string;
}

export interface FinalDoc {
  label: GeneralClass;
  confidence: number;
  provenance: string;
}

export interface SampleDoc {
  sample_id: number;
  x: number;
  y: number;
  stratum_id: string;
  source_product: string;
  status: SampleStatus;
  annotations: AnnotationDoc[];
  final: FinalDoc | null;
}

export interface SamplesResponse {
  samples: SampleDoc[];
  total: number;
  experts: string[];
}

export interface LegendEntry {
  label: string;
  general: GeneralClass;
}

export interface PatchWindowDoc {
  product: string;
  cell_size: number;
  side: number;
  nodata: number;
  values: number[][];
  legend: Record<string, LegendEntry>;
}

export interface PatchResponse {
  sample_id: number;
  windows: PatchWindowDoc[];
}

export interface ReviewResponse {
  sample_ids: number[];
  samples: SampleDoc[];
}

export interface MutationResponse {
  sample_id: number;
  status: SampleStatus;
  sample: SampleDoc;
}

export const GENERAL_CLASSES: GeneralClass[] = [
  "ArtificialSurfaces",
  "Agriculture",
  "Forest",
  "Water",
  "OthersUnclassified",
];

export const CLASS_DISPLAY: Record<GeneralClass, string> = {
  ArtificialSurfaces: "Artificial Surfaces",
  Agriculture: "Agriculture",
  Forest: "Forest",
  Water: "Water",
  OthersUnclassified: "Others/Unclassified",
};

export const CONFIDENCE_DISPLAY: Record<ConfidenceLevel, string> = {
  1: "#1 (>75%)",
  2: "#2 (25-75%)",
  3: "#3 (<25%)",
};
