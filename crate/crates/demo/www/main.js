// Expects the wasm-bindgen output (`--target web`) in ./pkg.
import init, { spectral_arcs, trace_comparison, blowup } from "./pkg/lame_spectra_demo.js";

const $ = (id) => document.getElementById(id);
const pair = (id) => {
  const v = $(id).value.split(",").map(Number);
  return v.length === 2 && v.every(Number.isFinite) ? v : null;
};
const show = (id, json) => { $(id).textContent = JSON.stringify(JSON.parse(json), null, 2); };

function drawArcs(view, half) {
  const c = $("sa-canvas"), g = c.getContext("2d");
  const s = c.width / (2 * half);
  const px = ([x, y]) => [(x + half) * s, (half - y) * s];
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#bbb";
  g.beginPath(); g.moveTo(0, c.height / 2); g.lineTo(c.width, c.height / 2);
  g.moveTo(c.width / 2, 0); g.lineTo(c.width / 2, c.height); g.stroke();
  if (!view.arcs) return;
  view.arcs.forEach((arc, i) => {
    g.strokeStyle = view.bounded[i] ? "#c03" : "#03c";
    g.lineWidth = 2;
    g.beginPath();
    arc.forEach((p, k) => (k ? g.lineTo : g.moveTo).apply(g, px(p)));
    g.stroke();
  });
  g.fillStyle = "#000";
  for (const r of view.roots) {
    const [x, y] = px(r);
    g.beginPath(); g.arc(x, y, 4, 0, 2 * Math.PI); g.fill();
  }
}

function runArcs() {
  const tau = pair("sa-tau"), wp = pair("sa-wp");
  const half = Number($("sa-half").value);
  if (!tau || !wp || !(half > 0)) { $("sa-out").textContent = "bad input"; return; }
  const json = spectral_arcs(tau[0], tau[1], wp[0], wp[1], Number($("sa-j").value), Number($("sa-n").value), half);
  const view = JSON.parse(json);
  drawArcs(view, half);
  const { arcs, ...rest } = view;
  $("sa-out").textContent = JSON.stringify({ arc_count: arcs ? arcs.length : 0, ...rest }, null, 2);
}

function runTraces() {
  const tau = pair("tc-tau"), p = pair("tc-p"), t = pair("tc-t");
  if (!tau || !p || !t) { $("tc-out").textContent = "bad input"; return; }
  show("tc-out", trace_comparison(tau[0], tau[1], p[0], p[1], t[0], t[1]));
}

function runBlowup() {
  const p = $("bu-p").value.trim() ? pair("bu-p") : [NaN, NaN];
  if (!p) { $("bu-out").textContent = "bad input"; return; }
  show("bu-out", blowup(Number($("bu-r").value), Number($("bu-s").value), p[0], p[1]));
}

await init();
$("status").textContent = "ready";
$("sa-run").onclick = runArcs;
$("tc-run").onclick = runTraces;
$("bu-run").onclick = runBlowup;
