// Minimal binary PGM (P5) / PPM (P6) decoder. The service serves stage
// images in these formats; browsers cannot render them natively, so the UI
// decodes to RGBA and paints onto a canvas.

export interface DecodedImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray;
}

const WHITESPACE = new Set([0x20, 0x09, 0x0a, 0x0d, 0x0b, 0x0c]);

function nextToken(bytes: Uint8Array, pos: number): { token: string; pos: number } {
  const n = bytes.length;
  while (pos < n) {
    if (bytes[pos] === 0x23) {
      // '#' comment to end of line
      while (pos < n && bytes[pos] !== 0x0a && bytes[pos] !== 0x0d) pos += 1;
    } else if (WHITESPACE.has(bytes[pos])) {
      pos += 1;
    } else {
      break;
    }
  }
  if (pos >= n) throw new Error(`netpbm: unexpected end of header at byte ${pos}`);
  const start = pos;
  while (pos < n && !WHITESPACE.has(bytes[pos]) && bytes[pos] !== 0x23) pos += 1;
  return { token: new TextDecoder().decode(bytes.subarray(start, pos)), pos };
}

export function decodeNetpbm(data: ArrayBuffer | Uint8Array): DecodedImage {
  const bytes = data instanceof Uint8Array ? data : new Uint8Array(data);
  let { token: magic, pos } = nextToken(bytes, 0);
  if (magic !== 'P5' && magic !== 'P6') throw new Error(`netpbm: unsupported magic ${magic}`);
  const channels = magic === 'P5' ? 1 : 3;
  const fields: number[] = [];
  for (const name of ['width', 'height', 'maxval']) {
    const r = nextToken(bytes, pos);
    pos = r.pos;
    const value = Number(r.token);
    if (!Number.isInteger(value)) throw new Error(`netpbm: bad ${name} token ${r.token}`);
    fields.push(value);
  }
  const [width, height, maxval] = fields;
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
    throw new Error(`netpbm: bad header ${width}x${height} maxval ${maxval}`);
  }
  pos += 1; // single whitespace after maxval
  const expected = width * height * channels;
  if (bytes.length - pos < expected) {
    throw new Error(`netpbm: truncated payload at byte ${bytes.length}`);
  }
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i += 1) {
    const src = pos + i * channels;
    const scale = (v: number) => Math.round((v * 255) / maxval);
    const r = scale(bytes[src]);
    const g = channels === 3 ? scale(bytes[src + 1]) : r;
    const b = channels === 3 ? scale(bytes[src + 2]) : r;
    rgba[i * 4] = r;
    rgba[i * 4 + 1] = g;
    rgba[i * 4 + 2] = b;
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, rgba };
}
