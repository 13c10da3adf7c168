/** Sketch canvas state: a replayable stroke list with an undo stack.
 *
 * The drawing surface is 448x448; strokes are dark-on-light (draw = ink,
 * erase = background paint). An uploaded PNG replaces everything drawn so
 * far and becomes the new base layer; strokes drawn afterwards stack on
 * top of it and undo back down to it.
 */

export const CANVAS_SIZE = 448;
export const QUERY_SIZE = 224;

export type Tool = "draw" | "erase";

export interface Stroke {
  tool: Tool;
  width: number;
  points: Array<[number, number]>;
}

export interface CanvasState {
  strokes: Stroke[];
  /** Data URL of an uploaded image serving as the base layer, if any. */
  background: string | null;
}

export function emptyState(): CanvasState {
  return { strokes: [], background: null };
}

export function beginStroke(state: CanvasState, tool: Tool, width: number,
                            x: number, y: number): CanvasState {
  const stroke: Stroke = { tool, width, points: [[x, y]] };
  return { ...state, strokes: [...state.strokes, stroke] };
}

export function extendStroke(state: CanvasState, x: number, y: number): CanvasState {
  if (state.strokes.length === 0) return state;
  const strokes = state.strokes.slice();
  const last = strokes[strokes.length - 1]!;
  strokes[strokes.length - 1] = { ...last, points: [...last.points, [x, y]] };
  return { ...state, strokes };
}

export function undo(state: CanvasState): CanvasState {
  if (state.strokes.length === 0) return state;
  return { ...state, strokes: state.strokes.slice(0, -1) };
}

export function clear(_state: CanvasState): CanvasState {
  return emptyState();
}

export function replaceWithUpload(_state: CanvasState, dataUrl: string): CanvasState {
  return { strokes: [], background: dataUrl };
}

/** Submit is blocked when there is nothing a query could be made from. */
export function hasContent(state: CanvasState): boolean {
  return state.background !== null || state.strokes.some((s) => s.tool === "draw");
}
