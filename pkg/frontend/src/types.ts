// Wire types mirroring the pipeline service's JSON schemas.

export interface RectJson {
  row_min: number;
  row_max: number;
  col_min: number;
  col_max: number;
}

export interface TemplateJson {
  id: string;
  rect: RectJson;
  weight: number;
}

export interface PipelineConfigJson {
  butterworth: { order: number; cutoff: number };
  canny: { sigma: number; high_quantile: number; low_ratio: number };
  hough: { radius_px: number; min_vote_fraction: number };
  merge_dist_px: number;
  margin_px: number;
  peak: { threshold_quantile: number; min_peak_separation: number };
  templates: TemplateJson[];
}

export interface WhiteCellJson {
  row: number;
  col: number;
  radius: number;
  votes: number;
}

export interface ReportJson {
  white_count: number;
  red_count: number;
  white_cells: WhiteCellJson[];
  red_centers: { row: number; col: number }[];
  rejected_fake_regions: number;
  stage_timings_ms?: Record<string, number>;
}

export type RunStatus =
  | { kind: 'idle' }
  | { kind: 'running' }
  | { kind: 'done' }
  | { kind: 'error'; stage: string | null; message: string };

// Stage thumbnails shown after every successful run.
export const STAGE_NAMES = ['filtered', 'binary', 'edges', 'res_combined', 'overlay'] as const;
export type StageName = (typeof STAGE_NAMES)[number] | 'original' | 'equalized';
