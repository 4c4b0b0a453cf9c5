/** Page wiring: connect, build controls from the schema, drive the canvas. */

import { SessionClient, WsTransport } from "./connection.js";
import { Control, buildControls, goPressed, goStatus, GoState } from "./controls.js";
import { CommandHistory } from "./history.js";
import { drawSeries } from "./plot.js";
import { SeriesStore } from "./series.js";
import { WorldRenderer } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function note(text: string, isError = false): void {
  const log = el<HTMLDivElement>("console-log");
  const line = document.createElement("div");
  line.textContent = text;
  line.className = isError ? "log-error" : "log-line";
  log.appendChild(line);
  log.scrollTop = log.scrollHeight;
}

async function start(): Promise<void> {
  const transport = new WsTransport(`ws://${location.host}/`);
  await transport.ready();
  const client = new SessionClient(transport);
  const renderer = new WorldRenderer(el<HTMLCanvasElement>("world"));
  const store = new SeriesStore(2000);
  const history = new CommandHistory();
  let goState: GoState = "idle";

  const goButton = el<HTMLButtonElement>("go");
  const tickLabel = el<HTMLSpanElement>("tick");

  const refreshGo = () => {
    goButton.textContent = goState === "running" ? "stop" : "go";
    goButton.classList.toggle("active", goState === "running");
  };

  client.onSchema((schema) => {
    renderer.setWorld(schema.world.width, schema.world.height);
    el<HTMLSpanElement>("model-name").textContent = schema.model;
    buildParamPanel(client, buildControls(schema.params));
  });

  client.onFrame((frame) => {
    renderer.render(frame);
    tickLabel.textContent = String(frame.tick);
  });

  client.onMetrics((m) => {
    store.ingest(m.tick, m.values);
    schedulePlots(store);
  });

  client.onStatus((status) => {
    goState = goStatus(goState, status.running);
    refreshGo();
    tickLabel.textContent = String(status.tick);
  });

  client.onServerError((err) => note(`server: ${err.message}`, true));

  el<HTMLButtonElement>("setup").onclick = async () => {
    store.clear();
    const reply = await client.control("setup");
    if (reply.type === "error") note(reply.message, true);
  };

  goButton.onclick = async () => {
    const effect = goPressed(goState);
    goState = effect.state;
    refreshGo();
    if (!effect.send) return;
    const reply = await client.control(effect.send);
    if (reply.type === "error") {
      // rejected control: fall back to the previous state with a notice
      goState = goStatus(goState, client.running);
      refreshGo();
      note(reply.message, true);
    }
  };

  el<HTMLButtonElement>("step").onclick = async () => {
    const reply = await client.control("step", 1);
    if (reply.type === "error") note(reply.message, true);
  };

  const input = el<HTMLInputElement>("command");
  input.onkeydown = async (ev) => {
    if (ev.key === "ArrowUp") {
      const prev = history.up();
      if (prev !== undefined) input.value = prev;
      ev.preventDefault();
      return;
    }
    if (ev.key === "ArrowDown") {
      input.value = history.down();
      ev.preventDefault();
      return;
    }
    if (ev.key !== "Enter") return;
    const text = input.value.trim();
    if (!text) return;
    if (!client.connected) {
      note("not connected; command refused", true);
      return;
    }
    history.push(text);
    input.value = "";
    note(`> ${text}`);
    const reply = await client.command(text);
    if (reply.type === "error") {
      const where = reply.line !== undefined ? ` (line ${reply.line}, col ${reply.col})` : "";
      note(`error: ${reply.message}${where}`, true);
    } else if (reply.values && reply.values.length) {
      reply.values.forEach((v) => note(v));
    }
  };
}

function buildParamPanel(client: SessionClient, controls: Control[]): void {
  const panel = el<HTMLDivElement>("params");
  panel.innerHTML = "";
  for (const control of controls) {
    const row = document.createElement("label");
    row.className = "param-row";
    const caption = document.createElement("span");
    caption.textContent = control.live ? `${control.name} (live)` : control.name;
    row.appendChild(caption);
    if (control.kind === "select") {
      const select = document.createElement("select");
      for (const option of control.options) {
        const opt = document.createElement("option");
        opt.value = String(option);
        opt.textContent = String(option);
        if (option === control.value) opt.selected = true;
        select.appendChild(opt);
      }
      select.onchange = () => void client.setParam(control.name, select.value);
      row.appendChild(select);
    } else if (control.kind === "slider") {
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(control.min);
      slider.max = String(control.max);
      slider.step = String(control.step);
      slider.value = String(control.value);
      const value = document.createElement("span");
      value.textContent = String(control.value);
      slider.oninput = () => {
        value.textContent = slider.value;
      };
      slider.onchange = () => void client.setParam(control.name, Number(slider.value));
      row.appendChild(slider);
      row.appendChild(value);
    } else {
      const box = document.createElement("input");
      box.type = "number";
      box.value = String(control.value);
      box.onchange = () => void client.setParam(control.name, Number(box.value));
      row.appendChild(box);
    }
    panel.appendChild(row);
  }
}

let plotScheduled = false;

function schedulePlots(store: SeriesStore): void {
  if (plotScheduled) return;
  plotScheduled = true;
  requestAnimationFrame(() => {
    plotScheduled = false;
    const host = el<HTMLDivElement>("plots");
    const palette = ["#6cf", "#fa6", "#8f8", "#f8f", "#ff6", "#6ff"];
    store.names().forEach((name, i) => {
      let canvas = document.getElementById(`plot-${name}`) as HTMLCanvasElement | null;
      if (!canvas) {
        canvas = document.createElement("canvas");
        canvas.id = `plot-${name}`;
        canvas.width = 320;
        canvas.height = 90;
        host.appendChild(canvas);
      }
      drawSeries(canvas, store.get(name)!, palette[i % palette.length]);
    });
  });
}

start().catch((err) => {
  document.body.insertAdjacentHTML(
    "afterbegin",
    `<div class="log-error">connection failed: ${String(err)}</div>`,
  );
});
