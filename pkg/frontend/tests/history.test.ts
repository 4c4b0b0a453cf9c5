import { test } from "node:test";
import assert from "node:assert/strict";

import { CommandHistory } from "../src/history.js";

test("up recalls newest first and sticks at the oldest", () => {
  const h = new CommandHistory();
  h.push("first");
  h.push("second");
  assert.equal(h.up(), "second");
  assert.equal(h.up(), "first");
  assert.equal(h.up(), "first");
});

test("down walks forward and ends on an empty line", () => {
  const h = new CommandHistory();
  h.push("a");
  h.push("b");
  h.up();
  h.up();
  assert.equal(h.down(), "b");
  assert.equal(h.down(), "");
  assert.equal(h.down(), "");
});

test("blank and duplicate-adjacent entries are not stored", () => {
  const h = new CommandHistory();
  h.push("  ");
  h.push("x");
  h.push("x");
  assert.equal(h.length, 1);
});

test("push resets the recall cursor", () => {
  const h = new CommandHistory();
  h.push("one");
  h.up();
  h.push("two");
  assert.equal(h.up(), "two");
});
