/**
 * SVG backend: the archival vector form of the same scene the raster
 * backend draws.  Text uses a monospace font with sizes proportional to
 * the bitmap glyphs.
 */

import { GLYPH_HEIGHT, GLYPH_WIDTH, textWidth } from "./font";
import { Scene } from "./scene";

function rgb(color: [number, number, number]): string {
  return `rgb(${color[0]},${color[1]},${color[2]})`;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderSvg(scene: Scene): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" ` +
      `viewBox="0 0 ${scene.width} ${scene.height}">`,
  );
  parts.push(
    `<rect x="0" y="0" width="${scene.width}" height="${scene.height}" fill="${rgb(scene.background)}"/>`,
  );
  for (const op of scene.ops) {
    switch (op.kind) {
      case "rect":
        parts.push(
          `<rect x="${op.x}" y="${op.y}" width="${op.w}" height="${op.h}" fill="${rgb(op.color)}"/>`,
        );
        break;
      case "line":
        parts.push(
          `<line x1="${op.x1}" y1="${op.y1}" x2="${op.x2}" y2="${op.y2}" ` +
            `stroke="${rgb(op.color)}" stroke-width="1"/>`,
        );
        break;
      case "disc":
        parts.push(`<circle cx="${op.x}" cy="${op.y}" r="${op.r}" fill="${rgb(op.color)}"/>`);
        break;
      case "text": {
        const size = GLYPH_HEIGHT * op.scale;
        let x = op.x;
        if (op.anchor === "middle") x -= textWidth(op.text, op.scale) / 2;
        if (op.anchor === "end") x -= textWidth(op.text, op.scale);
        parts.push(
          `<text x="${x}" y="${op.y + size}" font-family="monospace" font-size="${size}" ` +
            `letter-spacing="${op.scale}" fill="${rgb(op.color)}">${escapeXml(op.text)}</text>`,
        );
        break;
      }
    }
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
