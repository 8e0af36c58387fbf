// Drag-rectangle geometry and canvas painting helpers. Pure math here so
// it is testable without a DOM; main.ts wires the pointer events.

import type { DecodedImage } from './netpbm.js';
import type { RectJson, TemplateJson } from './types.js';

export interface DragState {
  startRow: number;
  startCol: number;
  row: number;
  col: number;
}

/** Canvas-space pointer position to image (row, col), given the canvas
 * display scale. */
export function pointerToImage(
  x: number,
  y: number,
  scale: number,
): { row: number; col: number } {
  return { row: y / scale, col: x / scale };
}

export function dragToRect(drag: DragState): RectJson {
  return {
    row_min: Math.min(drag.startRow, drag.row),
    row_max: Math.max(drag.startRow, drag.row),
    col_min: Math.min(drag.startCol, drag.col),
    col_max: Math.max(drag.startCol, drag.col),
  };
}

export function paintImage(ctx: CanvasRenderingContext2D, img: DecodedImage): void {
  ctx.canvas.width = img.width;
  ctx.canvas.height = img.height;
  ctx.putImageData(new ImageData(img.rgba, img.width, img.height), 0, 0);
}

export function drawTemplateBoxes(
  ctx: CanvasRenderingContext2D,
  templates: TemplateJson[],
  pending?: RectJson,
): void {
  ctx.save();
  ctx.lineWidth = 2;
  ctx.font = '14px sans-serif';
  for (const t of templates) {
    ctx.strokeStyle = '#00e000';
    ctx.fillStyle = '#00e000';
    ctx.strokeRect(
      t.rect.col_min,
      t.rect.row_min,
      t.rect.col_max - t.rect.col_min + 1,
      t.rect.row_max - t.rect.row_min + 1,
    );
    ctx.fillText(t.id, t.rect.col_min + 3, t.rect.row_min - 4);
  }
  if (pending) {
    ctx.strokeStyle = '#ffb000';
    ctx.setLineDash([4, 3]);
    ctx.strokeRect(
      pending.col_min,
      pending.row_min,
      pending.col_max - pending.col_min + 1,
      pending.row_max - pending.row_min + 1,
    );
  }
  ctx.restore();
}
