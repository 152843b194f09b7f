/**
 * Mirrors of the refinement service's JSON payloads. The UI never invents
 * fields of its own: every shape here is exactly what the service emits.
 */

export interface Keyword {
  term: string[];
  weight: number;
}

export interface TopicView {
  topic_id: number;
  label: string;
  size: number;
  keywords: Keyword[];
  representatives: number[];
  selected: boolean;
}

export interface RepresentativeSentence {
  sent_id: number;
  text: string;
}

export interface TopicDetail extends TopicView {
  representative_sentences: RepresentativeSentence[];
}

export interface SessionInfo {
  revision: number;
  session_id: string;
  created: string;
  updated: string;
  topic_count: number;
  outlier_count: number;
  sentence_count: number;
  selected_ids: number[];
}

export interface TopicsResponse {
  revision: number;
  outliers: number;
  topics: TopicView[];
}

export interface TopicResponse {
  revision: number;
  topic: TopicDetail;
}

export interface SentenceRow {
  sent_id: number;
  text: string;
  strength: number;
}

export interface TopicSentencesResponse {
  revision: number;
  topic_id: number;
  total: number;
  sentences: SentenceRow[];
}

/** Metric values; the service serializes undefined metrics (NaN) as null. */
export interface Metrics {
  outliers: number;
  topics: number;
  ngram_score: number | null;
  gini: number | null;
  coherence_cv: number | null;
  silhouette: number | null;
  time_minutes: number | null;
}

export interface MetricsResponse {
  revision: number;
  metrics: Metrics;
}

export interface MergeResponse {
  revision: number;
  topic: TopicView;
}

export interface RenameResponse {
  revision: number;
  topic: TopicView;
}

export interface SelectionResponse {
  revision: number;
  selected_ids: number[];
}

export interface ExportReport {
  session_id: string;
  revision: number;
  topics: TopicDetail[];
  metrics: Metrics;
  warning?: string;
}

export interface ApiErrorBody {
  error: string;
  revision: number;
}
