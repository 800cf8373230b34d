/** A tiny static-SVG scene builder; enough for scatter and line panels. */

export interface Extent {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export class Panel {
  private parts: string[] = [];

  constructor(
    readonly x0: number,
    readonly y0: number,
    readonly width: number,
    readonly height: number,
    readonly extent: Extent,
    readonly title: string,
  ) {}

  px(x: number): number {
    const { xMin, xMax } = this.extent;
    return this.x0 + ((x - xMin) / (xMax - xMin || 1)) * this.width;
  }

  py(y: number): number {
    const { yMin, yMax } = this.extent;
    return this.y0 + this.height - ((y - yMin) / (yMax - yMin || 1)) * this.height;
  }

  circle(x: number, y: number, r: number, fill: string, cls = ""): void {
    this.parts.push(
      `<circle cx="${this.px(x).toFixed(2)}" cy="${this.py(y).toFixed(2)}" r="${r}" ` +
        `fill="${fill}" fill-opacity="0.75"${cls ? ` class="${cls}"` : ""}/>`,
    );
  }

  polyline(xs: number[], ys: number[], stroke: string, width = 1, cls = "", dash = ""): void {
    const pts = xs.map((x, i) => `${this.px(x).toFixed(2)},${this.py(ys[i]).toFixed(2)}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"` +
        `${dash ? ` stroke-dasharray="${dash}"` : ""}${cls ? ` class="${cls}"` : ""}/>`,
    );
  }

  marker(x: number, y: number, stroke: string): void {
    const cx = this.px(x);
    const cy = this.py(y);
    const s = 5;
    this.parts.push(
      `<path d="M ${cx - s} ${cy - s} L ${cx + s} ${cy + s} M ${cx - s} ${cy + s} L ${cx + s} ${cy - s}" ` +
        `stroke="${stroke}" stroke-width="2" class="target-marker"/>`,
    );
  }

  render(): string {
    const frame =
      `<rect x="${this.x0}" y="${this.y0}" width="${this.width}" height="${this.height}" ` +
      `fill="none" stroke="#888"/>` +
      `<text x="${this.x0 + this.width / 2}" y="${this.y0 - 8}" text-anchor="middle" ` +
      `font-size="13" font-family="sans-serif">${this.title}</text>`;
    return frame + this.parts.join("");
  }
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}"><rect width="100%" height="100%" fill="white"/>` +
    body +
    `</svg>`
  );
}

export function extentOf(values: number[], pad = 0.08): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  return [lo - pad * span, hi + pad * span];
}

export function labelColor(label: number): string {
  return label > 0 ? "#c0392b" : "#2364aa";
}
