import { ClutchAccumulator, RateLimiter } from "./input.js";
import { SceneCanvas } from "./render.js";
import { Session } from "./session.js";

const COMMAND_HZ = 60;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main() {
  const session = new Session();
  const topView = new SceneCanvas(el<HTMLCanvasElement>("view-top"), "xy");
  const sideView = new SceneCanvas(el<HTMLCanvasElement>("view-side"), "xz");
  const banner = el<HTMLDivElement>("banner");
  const gaugePanel = el<HTMLDivElement>("gauges");
  const errorLog = el<HTMLDivElement>("errors");
  const betaSlider = el<HTMLInputElement>("beta");
  const alphaSlider = el<HTMLInputElement>("alpha");
  const betaLabel = el<HTMLSpanElement>("beta-value");
  const alphaLabel = el<HTMLSpanElement>("alpha-value");
  const masterSelect = el<HTMLSelectElement>("master");
  const urlInput = el<HTMLInputElement>("server-url");

  let clutch: ClutchAccumulator | null = null;
  const limiter = new RateLimiter(1000 / COMMAND_HZ);
  let dirty = false;
  let fpsCount = 0;
  let fpsStamp = performance.now();

  function connect() {
    banner.textContent = `connecting to ${urlInput.value} ...`;
    banner.className = "banner warn";
    session.connect(urlInput.value);
  }

  session.onchange = () => {
    dirty = true;
  };

  el<HTMLButtonElement>("reconnect").onclick = connect;

  function currentClutch(): ClutchAccumulator {
    const id = parseInt(masterSelect.value, 10);
    const ms = session.view.scene?.motion_scaling ?? 1.0;
    if (!clutch || clutch.masterId !== id) clutch = new ClutchAccumulator(id, ms);
    clutch.motionScaling = ms;
    return clutch;
  }

  // hold-to-engage clutch on Space, like a master pedal
  window.addEventListener("keydown", (ev) => {
    if (ev.code === "Space" && !ev.repeat) {
      ev.preventDefault();
      const c = currentClutch();
      c.engage();
      session.sendMasterCmd(c.command());
    }
  });
  window.addEventListener("keyup", (ev) => {
    if (ev.code === "Space") {
      const c = currentClutch();
      c.disengage();
      session.sendMasterCmd(c.command());
    }
  });

  for (const view of [topView, sideView]) {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    view.canvas.addEventListener("pointerdown", (ev) => {
      dragging = true;
      lastX = ev.offsetX;
      lastY = ev.offsetY;
      view.canvas.setPointerCapture(ev.pointerId);
    });
    view.canvas.addEventListener("pointerup", () => {
      dragging = false;
    });
    view.canvas.addEventListener("pointermove", (ev) => {
      if (!dragging || !clutch || !clutch.engaged) return;
      const [dx, dy, dz] = view.dragToWorld(ev.offsetX - lastX, ev.offsetY - lastY);
      lastX = ev.offsetX;
      lastY = ev.offsetY;
      clutch.drag(dx, dy, dz);
      if (limiter.ready(performance.now())) {
        session.sendMasterCmd(clutch.command());
      }
    });
  }

  betaSlider.oninput = () => (betaLabel.textContent = betaSlider.value);
  alphaSlider.oninput = () => (alphaLabel.textContent = alphaSlider.value);
  betaSlider.onchange = () => session.setParam("beta", parseFloat(betaSlider.value));
  alphaSlider.onchange = () => session.setParam("alpha", parseFloat(alphaSlider.value));

  function paint() {
    requestAnimationFrame(paint);
    if (!dirty) return;
    dirty = false;
    const view = session.view;
    const frame = view.takeLatest() ?? view.frame;
    if (!view.connected) {
      banner.textContent = "disconnected — view frozen";
      banner.className = "banner error";
    } else if (frame) {
      fpsCount += 1;
      const now = performance.now();
      if (now - fpsStamp > 1000) {
        banner.textContent =
          `${view.scene?.name ?? "scene"}  tick ${frame.tick}  t=${frame.time.toFixed(2)}s  ` +
          `beta=${frame.beta.toFixed(2)} alpha=${frame.alpha.toFixed(2)}  ${fpsCount} fps`;
        banner.className = "banner ok";
        fpsCount = 0;
        fpsStamp = now;
      }
    }
    if (!frame) return;

    for (const v of [topView, sideView]) {
      v.clear();
      if (view.scene) v.drawScene(view.scene);
      v.drawFrame(frame);
    }

    gaugePanel.innerHTML = "";
    for (const g of view.gauges()) {
      const row = document.createElement("div");
      row.className = "gauge" + (g.critical ? " critical" : "");
      const bar = document.createElement("div");
      bar.className = "bar";
      bar.style.width = `${Math.round(g.fill * 100)}%`;
      const label = document.createElement("span");
      label.textContent = `${g.name} (${g.zone}) d=${(g.d * 1000).toFixed(1)}mm margin=${(g.margin * 1000).toFixed(1)}mm`;
      row.appendChild(bar);
      row.appendChild(label);
      gaugePanel.appendChild(row);
    }

    if (view.lastError) {
      const div = document.createElement("div");
      div.textContent = `server error [${view.lastError.code}]: ${view.lastError.detail}`;
      errorLog.prepend(div);
      view.lastError = null;
      while (errorLog.childNodes.length > 6) errorLog.removeChild(errorLog.lastChild!);
    }
  }

  connect();
  requestAnimationFrame(paint);
}

window.addEventListener("load", main);
