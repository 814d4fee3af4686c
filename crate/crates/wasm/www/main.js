import init, { Evolution, multiplierCurve, sigma3Slice, energyDrift } from "./pkg/kdv_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plot(canvas, series, colors) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const finite = series.flat().filter(Number.isFinite);
  if (finite.length === 0) return;
  let lo = Math.min(...finite), hi = Math.max(...finite);
  if (hi - lo < 1e-300) { lo -= 1; hi += 1; }
  const y = (v) => h - 4 - ((v - lo) / (hi - lo)) * (h - 8);
  if (lo < 0 && hi > 0) {
    ctx.strokeStyle = "#ccc";
    ctx.beginPath(); ctx.moveTo(0, y(0)); ctx.lineTo(w, y(0)); ctx.stroke();
  }
  series.forEach((s, k) => {
    ctx.strokeStyle = colors[k];
    ctx.beginPath();
    let pen = false;
    s.forEach((v, i) => {
      const x = (i / Math.max(1, s.length - 1)) * w;
      if (!Number.isFinite(v)) { pen = false; return; }
      pen ? ctx.lineTo(x, y(v)) : ctx.moveTo(x, y(v));
      pen = true;
    });
    ctx.stroke();
  });
}

function report(el, f) {
  try { f(); el.classList.remove("error"); }
  catch (e) { el.textContent = String(e.message ?? e); el.classList.add("error"); }
}

let evolution = null;
let frame = 0;

function tick() {
  if (!evolution) return;
  report($("ev-readout"), () => {
    evolution.advance(0.02);
    plot($("ev-profile"), [Array.from(evolution.profile())], ["#1f5fa8"]);
    plot($("ev-spectrum"), [Array.from(evolution.spectrum(), (c) => Math.log10(c + 1e-16))], ["#a83a1f"]);
    $("ev-readout").textContent =
      `t = ${evolution.time().toFixed(2)}  ‖u‖ = ${evolution.l2().toExponential(4)}  H = ${evolution.hamiltonian().toExponential(4)}  dt = ${evolution.dt().toExponential(2)}`;
    frame = requestAnimationFrame(tick);
  });
}

function start() {
  stop();
  report($("ev-readout"), () => {
    evolution = new Evolution(num("ev-k"), num("ev-gamma"), num("ev-amp"), num("ev-force"), num("ev-seed"));
    frame = requestAnimationFrame(tick);
  });
}

function stop() {
  cancelAnimationFrame(frame);
  if (evolution) { evolution.free(); evolution = null; }
}

function drawMultiplier() {
  report($("m-readout"), () => {
    const n = num("m-n"), s = num("m-s"), xi1 = num("m-xi1");
    const reach = Math.max(8 * n, 2 * Math.abs(xi1));
    const m = Array.from(multiplierCurve(n, s, reach));
    const sig = Array.from(sigma3Slice(n, s, xi1, reach));
    plot($("m-curve"), [m], ["#1f5fa8"]);
    plot($("m-sigma"), [sig], ["#2b8a3e"]);
    $("m-readout").textContent =
      `m(ξ) for 0 ≤ ξ ≤ ${reach};  σ₃(${xi1}, ξ, ${-xi1} − ξ) for |ξ| ≤ ${reach}, max |σ₃| = ${Math.max(...sig.filter(Number.isFinite).map(Math.abs)).toExponential(3)}`;
  });
}

function runEnergy() {
  report($("e-readout"), () => {
    const raw = energyDrift(num("e-k"), num("e-amp"), num("e-n"), -0.5, num("e-t"), 100, 1);
    const e2 = [], e4 = [];
    for (let i = 0; i < raw.length; i += 3) { e2.push(raw[i + 1] - raw[1]); e4.push(raw[i + 2] - raw[2]); }
    plot($("e-plot"), [e2, e4], ["#a83a1f", "#1f5fa8"]);
    const peak = (v) => Math.max(...v.map(Math.abs)).toExponential(3);
    $("e-readout").textContent = `max |E²(t) − E²(0)| = ${peak(e2)} (red)   max |E⁴(t) − E⁴(0)| = ${peak(e4)} (blue)`;
  });
}

await init();
$("ev-start").onclick = start;
$("ev-stop").onclick = stop;
$("m-draw").onclick = drawMultiplier;
$("e-run").onclick = runEnergy;
drawMultiplier();
