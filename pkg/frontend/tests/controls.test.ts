import { test } from "node:test";
import assert from "node:assert/strict";

import { buildControls, clampControl, goPressed, goStatus } from "../src/controls.js";
import { ParamSpec } from "../src/protocol.js";

test("go press toggles like a forever button", () => {
  const first = goPressed("idle");
  assert.equal(first.send, "go");
  assert.equal(first.state, "running");
  const second = goPressed(first.state);
  assert.equal(second.send, "stop");
  assert.equal(second.state, "idle");
});

test("server status is authoritative for the go state", () => {
  assert.equal(goStatus("running", false), "idle");
  assert.equal(goStatus("idle", true), "running");
});

test("sliders inherit schema bounds and defaults", () => {
  const params: ParamSpec[] = [
    { name: "capture_radius", type: "float", default: 3, min: 0.1, max: 50, live: false },
    { name: "n_nodes", type: "int", default: 100, min: 0, max: 20000, live: false },
  ];
  const [radius, nodes] = buildControls(params);
  assert.equal(radius.kind, "slider");
  if (radius.kind === "slider") {
    assert.equal(radius.min, 0.1);
    assert.equal(radius.max, 50);
    assert.equal(radius.value, 3);
  }
  assert.equal(nodes.kind, "slider");
  if (nodes.kind === "slider") {
    assert.ok(Number.isInteger(nodes.step));
    assert.ok(nodes.step >= 1);
  }
});

test("choice parameters become selects", () => {
  const params: ParamSpec[] = [
    { name: "overlay", type: "choice", default: "lattice", choices: ["lattice", "random"], live: false },
  ];
  const [overlay] = buildControls(params);
  assert.equal(overlay.kind, "select");
  if (overlay.kind === "select") {
    assert.deepEqual(overlay.options, ["lattice", "random"]);
  }
});

test("slider edits clamp into schema bounds", () => {
  const control = { kind: "slider" as const, name: "r", min: 1, max: 9, step: 1, value: 5, live: true };
  assert.equal(clampControl(control, 99), 9);
  assert.equal(clampControl(control, -4), 1);
  assert.equal(clampControl(control, 7), 7);
});
