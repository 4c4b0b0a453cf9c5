/** Pure control-panel logic: the forever-button reducer and slider specs. */

import { ParamSpec } from "./protocol.js";

export type GoState = "idle" | "running";

export interface GoEffect {
  state: GoState;
  send?: "go" | "stop";
}

/**
 * Forever-button semantics: pressing Go while idle starts the run, pressing
 * it again stops; server status is authoritative and may also flip the
 * state (e.g. the model finished on its own).
 */
export function goPressed(state: GoState): GoEffect {
  return state === "running" ? { state: "idle", send: "stop" } : { state: "running", send: "go" };
}

export function goStatus(state: GoState, running: boolean): GoState {
  return running ? "running" : "idle";
}

export interface SliderControl {
  kind: "slider";
  name: string;
  min: number;
  max: number;
  step: number;
  value: number;
  live: boolean;
}

export interface SelectControl {
  kind: "select";
  name: string;
  options: (number | string)[];
  value: number | string;
  live: boolean;
}

export interface NumberControl {
  kind: "number";
  name: string;
  value: number;
  live: boolean;
}

export type Control = SliderControl | SelectControl | NumberControl;

/** Build one control descriptor per parameter from the server schema. */
export function buildControls(params: ParamSpec[]): Control[] {
  return params.map((p): Control => {
    if (p.type === "choice" && p.choices) {
      return { kind: "select", name: p.name, options: p.choices, value: p.default, live: p.live };
    }
    if (p.min !== undefined && p.max !== undefined) {
      const span = p.max - p.min;
      const step = p.type === "int" ? Math.max(1, Math.round(span / 1000)) : span / 1000;
      return {
        kind: "slider",
        name: p.name,
        min: p.min,
        max: p.max,
        step,
        value: Number(p.default),
        live: p.live,
      };
    }
    return { kind: "number", name: p.name, value: Number(p.default), live: p.live };
  });
}

/** Clamp a slider edit into its schema bounds. */
export function clampControl(control: SliderControl, value: number): number {
  return Math.min(control.max, Math.max(control.min, value));
}
