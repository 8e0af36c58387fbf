// DOM wiring for the tuner console. All analysis numbers come from the
// service report; this file only moves bytes and edits the config object.

import { ApiClient } from './api.js';
import { drawTemplateBoxes, dragToRect, paintImage, pointerToImage } from './canvas.js';
import type { DragState } from './canvas.js';
import {
  WEIGHT_MAX,
  WEIGHT_MIN,
  WEIGHT_STEP,
  addTemplateFromDrag,
  removeTemplate,
  serializeConfig,
  deserializeConfig,
  setTemplateWeight,
} from './config.js';
import { decodeNetpbm } from './netpbm.js';
import type { DecodedImage } from './netpbm.js';
import { SessionView } from './state.js';
import { STAGE_NAMES } from './types.js';

const api = new ApiClient('');
const view = new SessionView(api);

const el = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;
const canvas = el<HTMLCanvasElement>('image-canvas');
const ctx = canvas.getContext('2d')!;
const banner = el<HTMLDivElement>('counts-banner');
const statusBadge = el<HTMLSpanElement>('status-badge');
const message = el<HTMLDivElement>('message');
const runButton = el<HTMLButtonElement>('run-button');
const templateList = el<HTMLTableSectionElement>('template-rows');
const thumbs = el<HTMLDivElement>('thumbnails');

let original: DecodedImage | null = null;
let drag: DragState | null = null;

function repaint(): void {
  if (!original) return;
  paintImage(ctx, original);
  drawTemplateBoxes(ctx, view.config.templates, drag ? dragToRect(drag) : undefined);
}

function refreshStatus(): void {
  runButton.disabled = view.running;
  banner.textContent = view.countsBanner;
  const s = view.status;
  statusBadge.className = `badge ${s.kind}`;
  statusBadge.textContent =
    s.kind === 'error' ? `error${s.stage ? ` in stage '${s.stage}'` : ''}` : s.kind;
}

function refreshTemplates(): void {
  templateList.innerHTML = '';
  for (const t of view.config.templates) {
    const row = document.createElement('tr');
    const weight = document.createElement('input');
    weight.type = 'range';
    weight.min = String(WEIGHT_MIN);
    weight.max = String(WEIGHT_MAX);
    weight.step = String(WEIGHT_STEP);
    weight.value = String(t.weight);
    const weightLabel = document.createElement('span');
    weightLabel.textContent = t.weight.toFixed(2);
    weight.oninput = () => {
      setTemplateWeight(view.config, t.id, Number(weight.value));
      weightLabel.textContent = Number(weight.value).toFixed(2);
    };
    const drop = document.createElement('button');
    drop.textContent = 'remove';
    drop.onclick = () => {
      removeTemplate(view.config, t.id);
      refreshTemplates();
      repaint();
    };
    const cells = [
      t.id,
      `(${t.rect.row_min},${t.rect.col_min})-(${t.rect.row_max},${t.rect.col_max})`,
    ];
    for (const text of cells) {
      const td = document.createElement('td');
      td.textContent = text;
      row.appendChild(td);
    }
    for (const node of [weight, weightLabel, drop]) {
      const td = document.createElement('td');
      td.appendChild(node);
      row.appendChild(td);
    }
    templateList.appendChild(row);
  }
}

function bindParam(id: string, get: () => number, set: (v: number) => void): void {
  const input = el<HTMLInputElement>(id);
  input.value = String(get());
  input.onchange = () => set(Number(input.value));
}

function bindParams(): void {
  bindParam('p-order', () => view.config.butterworth.order, (v) => (view.config.butterworth.order = v));
  bindParam('p-cutoff', () => view.config.butterworth.cutoff, (v) => (view.config.butterworth.cutoff = v));
  bindParam('p-sigma', () => view.config.canny.sigma, (v) => (view.config.canny.sigma = v));
  bindParam('p-highq', () => view.config.canny.high_quantile, (v) => (view.config.canny.high_quantile = v));
  bindParam('p-lowr', () => view.config.canny.low_ratio, (v) => (view.config.canny.low_ratio = v));
  bindParam('p-radius', () => view.config.hough.radius_px, (v) => (view.config.hough.radius_px = v));
  bindParam('p-votes', () => view.config.hough.min_vote_fraction, (v) => (view.config.hough.min_vote_fraction = v));
  bindParam('p-merge', () => view.config.merge_dist_px, (v) => (view.config.merge_dist_px = v));
  bindParam('p-margin', () => view.config.margin_px, (v) => (view.config.margin_px = v));
  bindParam('p-quantile', () => view.config.peak.threshold_quantile, (v) => (view.config.peak.threshold_quantile = v));
  bindParam('p-separation', () => view.config.peak.min_peak_separation, (v) => (view.config.peak.min_peak_separation = v));
}

async function refreshThumbnails(stages: { name: string; bytes: ArrayBuffer }[]): Promise<void> {
  thumbs.innerHTML = '';
  for (const stage of stages) {
    const decoded = decodeNetpbm(stage.bytes);
    const thumb = document.createElement('canvas');
    const tctx = thumb.getContext('2d')!;
    paintImage(tctx, decoded);
    thumb.title = stage.name;
    thumb.className = 'thumb';
    const wrap = document.createElement('figure');
    const caption = document.createElement('figcaption');
    caption.textContent = stage.name === 'res_combined' ? 'Res_0 heatmap' : stage.name;
    wrap.appendChild(thumb);
    wrap.appendChild(caption);
    thumbs.appendChild(wrap);
  }
}

el<HTMLInputElement>('file-input').onchange = async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  const bytes = await file.arrayBuffer();
  try {
    original = decodeNetpbm(bytes);
  } catch (err) {
    message.textContent = (err as Error).message;
    return;
  }
  await view.upload(bytes, original.width, original.height);
  message.textContent = `session ${view.sessionId}: ${original.width}x${original.height}`;
  repaint();
  refreshStatus();
};

canvas.onpointerdown = (ev) => {
  if (!original) return;
  const p = pointerToImage(ev.offsetX, ev.offsetY, 1);
  drag = { startRow: p.row, startCol: p.col, row: p.row, col: p.col };
};
canvas.onpointermove = (ev) => {
  if (!drag) return;
  const p = pointerToImage(ev.offsetX, ev.offsetY, 1);
  drag.row = p.row;
  drag.col = p.col;
  repaint();
};
canvas.onpointerup = () => {
  if (!drag || !original) return;
  const result = addTemplateFromDrag(view.config, dragToRect(drag), original.height, original.width);
  message.textContent = result.ok ? `added template ${result.template!.id}` : result.message!;
  drag = null;
  refreshTemplates();
  repaint();
};

runButton.onclick = async () => {
  const blocked = view.blockedReason();
  if (blocked) {
    message.textContent = blocked;
    return;
  }
  refreshStatus();
  try {
    const stages = await view.runAndRefresh();
    await refreshThumbnails(stages);
    message.textContent = '';
  } catch (err) {
    message.textContent = (err as Error).message;
  }
  refreshStatus();
};

el<HTMLButtonElement>('export-config').onclick = () => {
  el<HTMLTextAreaElement>('config-json').value = serializeConfig(view.config);
};
el<HTMLButtonElement>('import-config').onclick = () => {
  try {
    view.config = deserializeConfig(el<HTMLTextAreaElement>('config-json').value);
    refreshTemplates();
    bindParams();
    repaint();
    message.textContent = 'config loaded';
  } catch (err) {
    message.textContent = `bad config: ${(err as Error).message}`;
  }
};

bindParams();
refreshStatus();
void STAGE_NAMES;
