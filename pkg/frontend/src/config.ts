// Pipeline config state: defaults, template bookkeeping, (de)serialization.
// The UI only edits this object; all numbers shown to the user come back
// from the service, never from recomputation here.

import type { PipelineConfigJson, RectJson, TemplateJson } from './types.js';

export const MIN_TEMPLATE_SIZE_PX = 4;
export const WEIGHT_MIN = 0;
export const WEIGHT_MAX = 3;
export const WEIGHT_STEP = 0.05;

export function defaultConfig(): PipelineConfigJson {
  return {
    butterworth: { order: 9, cutoff: 0.25 },
    canny: { sigma: 1.4, high_quantile: 0.9, low_ratio: 0.4 },
    hough: { radius_px: 60, min_vote_fraction: 0.15 },
    merge_dist_px: 60,
    margin_px: 8,
    peak: { threshold_quantile: 0.95, min_peak_separation: 19 },
    templates: [],
  };
}

export function clampRect(rect: RectJson, height: number, width: number): RectJson {
  const clamp = (v: number, hi: number) => Math.min(Math.max(Math.round(v), 0), hi);
  let rowMin = clamp(Math.min(rect.row_min, rect.row_max), height - 1);
  let rowMax = clamp(Math.max(rect.row_min, rect.row_max), height - 1);
  let colMin = clamp(Math.min(rect.col_min, rect.col_max), width - 1);
  let colMax = clamp(Math.max(rect.col_min, rect.col_max), width - 1);
  return { row_min: rowMin, row_max: rowMax, col_min: colMin, col_max: colMax };
}

export function rectTooSmall(rect: RectJson): boolean {
  return (
    rect.row_max - rect.row_min + 1 < MIN_TEMPLATE_SIZE_PX ||
    rect.col_max - rect.col_min + 1 < MIN_TEMPLATE_SIZE_PX
  );
}

export interface AddTemplateResult {
  ok: boolean;
  message?: string;
  template?: TemplateJson;
}

/** Append a template from a drag rectangle: clamp to the image, reject
 * sub-4-px rectangles, default weight 1.0, automatic id. */
export function addTemplateFromDrag(
  config: PipelineConfigJson,
  drag: RectJson,
  imageHeight: number,
  imageWidth: number,
): AddTemplateResult {
  const rect = clampRect(drag, imageHeight, imageWidth);
  if (rectTooSmall(rect)) {
    return { ok: false, message: `template must be at least ${MIN_TEMPLATE_SIZE_PX}x${MIN_TEMPLATE_SIZE_PX} px` };
  }
  const usedIds = new Set(config.templates.map((t) => t.id));
  let n = config.templates.length + 1;
  while (usedIds.has(String(n))) n += 1;
  const template: TemplateJson = { id: String(n), rect, weight: 1.0 };
  config.templates.push(template);
  return { ok: true, template };
}

export function setTemplateWeight(config: PipelineConfigJson, id: string, weight: number): void {
  const clamped = Math.min(Math.max(weight, WEIGHT_MIN), WEIGHT_MAX);
  const t = config.templates.find((entry) => entry.id === id);
  if (t) t.weight = clamped;
}

export function removeTemplate(config: PipelineConfigJson, id: string): void {
  config.templates = config.templates.filter((t) => t.id !== id);
}

export function serializeConfig(config: PipelineConfigJson): string {
  return JSON.stringify(config, null, 2);
}

export function deserializeConfig(text: string): PipelineConfigJson {
  const parsed = JSON.parse(text) as Partial<PipelineConfigJson>;
  const base = defaultConfig();
  return {
    butterworth: { ...base.butterworth, ...parsed.butterworth },
    canny: { ...base.canny, ...parsed.canny },
    hough: { ...base.hough, ...parsed.hough },
    merge_dist_px: parsed.merge_dist_px ?? base.merge_dist_px,
    margin_px: parsed.margin_px ?? base.margin_px,
    peak: { ...base.peak, ...parsed.peak },
    templates: (parsed.templates ?? []).map((t) => ({ id: t.id, rect: { ...t.rect }, weight: t.weight })),
  };
}
