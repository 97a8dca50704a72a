// Deserialized API payloads, read-only mirrors of the service schemas.
// Fractions arrive as fixed 4-decimal strings and must be rendered
// verbatim; the dashboard never re-rounds a number.

export type MicroLabel = "teamwork" | "communication" | "innovation";

export interface MicroLabelCounts {
  teamwork: number;
  communication: number;
  innovation: number;
}

export interface HighlightSpan {
  sentence_id: string;
  start: number;
  end: number;
  confidence: string;
}

export interface LetterSummary {
  letter_id: string;
  writer_role: string;
  total_sentences: number;
  proportion: string;
  highlights: HighlightSpan[];
}

export interface ReportView {
  applicant_id: string;
  content_hash: string;
  pipeline_version: string;
  letters: LetterSummary[];
  micro_label_counts: MicroLabelCounts;
  summary: string;
  summary_degraded: boolean;
}

export interface SentenceView {
  sentence_id: string;
  start: number;
  end: number;
  text: string;
}

export interface LetterView {
  letter_id: string;
  applicant_id: string;
  writer_role: string;
  raw_text: string;
  sentences: SentenceView[];
  highlights: HighlightSpan[];
}

export interface ApplicantRow {
  applicant_id: string;
  letters_count: number;
  highlight_proportion: string;
  micro_label_counts: MicroLabelCounts;
}
