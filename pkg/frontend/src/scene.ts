/**
 * Device-independent draw list.  Figures build a Scene once; the raster
 * and SVG backends consume the same ops, so the two outputs can never
 * show different data.
 */

export type Color = [number, number, number];

export interface RectOp {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  color: Color;
}

export interface LineOp {
  kind: "line";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color: Color;
}

export interface DiscOp {
  kind: "disc";
  x: number;
  y: number;
  r: number;
  color: Color;
}

export interface TextOp {
  kind: "text";
  x: number;
  y: number; // top of the glyph box
  text: string;
  scale: number;
  color: Color;
  anchor: "start" | "middle" | "end";
}

export type Op = RectOp | LineOp | DiscOp | TextOp;

export interface Scene {
  width: number;
  height: number;
  background: Color;
  ops: Op[];
}

export const BLACK: Color = [0, 0, 0];
export const WHITE: Color = [255, 255, 255];
export const GRID: Color = [210, 210, 210];
export const SERIES: Color = [31, 80, 154];
export const ACCENT: Color = [170, 60, 40];
export const BAR: Color = [96, 140, 190];

export function sceneTexts(scene: Scene): string[] {
  return scene.ops.filter((op): op is TextOp => op.kind === "text").map((op) => op.text);
}
