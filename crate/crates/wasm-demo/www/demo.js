// Built bindings live in ./pkg (see the README for the wasm-bindgen step).
import init, { spectrum, support, masc_two_moons } from "./pkg/masc_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function fail(out, e) {
  out.textContent = String(e.message ?? e);
  out.classList.add("err");
}

function ok(out, text) {
  out.textContent = text;
  out.classList.remove("err");
}

// map data bounds onto a canvas with a margin
function frame(canvas, xs, ys, pad = 20) {
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (canvas.width - 2 * pad) / (x1 - x0 || 1);
  const sy = (canvas.height - 2 * pad) / (y1 - y0 || 1);
  return {
    x: (v) => pad + (v - x0) * sx,
    y: (v) => canvas.height - pad - (v - y0) * sy,
  };
}

function runSpectrum() {
  const out = $("sp-out");
  try {
    const locs = [];
    const amps = [];
    for (const item of $("sp-sources").value.split(",")) {
      if (!item.trim()) continue;
      const [x, a] = item.split(":").map(Number);
      if (!Number.isFinite(x) || !Number.isFinite(a)) throw new Error(`bad source "${item.trim()}"`);
      locs.push(x);
      amps.push(a);
    }
    const v = spectrum(new Float64Array(locs), new Float64Array(amps), Number($("sp-n").value), Number($("sp-t").value));
    const grid = v.grid();
    const vals = v.values();
    const px = v.peak_x();
    const ph = v.peak_h();
    v.free();

    const c = $("sp-canvas");
    const g = c.getContext("2d");
    g.clearRect(0, 0, c.width, c.height);
    const top = Math.max(...vals, ...amps, Number($("sp-t").value));
    const f = frame(c, [-Math.PI, Math.PI], [0, top * 1.05]);
    g.strokeStyle = "#999";
    g.setLineDash([4, 4]);
    g.beginPath();
    g.moveTo(f.x(-Math.PI), f.y(Number($("sp-t").value)));
    g.lineTo(f.x(Math.PI), f.y(Number($("sp-t").value)));
    g.stroke();
    g.setLineDash([]);
    g.strokeStyle = COLORS[0];
    g.beginPath();
    grid.forEach((x, i) => (i ? g.lineTo(f.x(x), f.y(vals[i])) : g.moveTo(f.x(x), f.y(vals[i]))));
    g.stroke();
    g.fillStyle = "#444";
    locs.forEach((x, i) => g.fillRect(f.x(x) - 1, f.y(amps[i]), 2, f.y(0) - f.y(amps[i])));
    g.fillStyle = COLORS[1];
    px.forEach((x, i) => {
      g.beginPath();
      g.arc(f.x(x), f.y(ph[i]), 4, 0, 2 * Math.PI);
      g.fill();
    });
    const rows = Array.from(px, (x, i) => `${x.toFixed(4)}  ${ph[i].toFixed(4)}`);
    ok(out, `${px.length} peaks (location, height)\n${rows.join("\n")}`);
  } catch (e) {
    fail(out, e);
  }
}

const field = { pts: [] };

function drawField() {
  const out = $("sf-out");
  const c = $("sf-canvas");
  const g = c.getContext("2d");
  const theta = Number($("sf-theta").value);
  $("sf-theta-v").textContent = theta.toFixed(2);
  g.clearRect(0, 0, c.width, c.height);
  if (field.pts.length < 2) {
    field.pts.forEach(([x, y]) => g.strokeRect(x - 3, y - 3, 6, 6));
    ok(out, "add at least two points");
    return;
  }
  try {
    const v = support(new Float64Array(field.pts.flat()), Number($("sf-n").value), theta);
    const f = v.field();
    const mask = v.mask();
    v.free();
    field.pts.forEach(([x, y], i) => {
      g.beginPath();
      g.arc(x, y, 4, 0, 2 * Math.PI);
      g.strokeStyle = g.fillStyle = `hsl(${220 - 220 * f[i]}, 70%, 45%)`;
      mask[i] ? g.fill() : g.stroke();
    });
    const kept = mask.reduce((a, b) => a + b, 0);
    ok(out, `${kept} of ${field.pts.length} points in the threshold set`);
  } catch (e) {
    fail(out, e);
  }
}

function scatter() {
  // two dense blobs and a sparse background
  const gauss = () => Math.sqrt(-2 * Math.log(1 - Math.random())) * Math.cos(2 * Math.PI * Math.random());
  field.pts = [];
  for (const [cx, cy] of [[150, 180], [340, 320]]) {
    for (let i = 0; i < 120; i++) field.pts.push([cx + 25 * gauss(), cy + 25 * gauss()]);
  }
  for (let i = 0; i < 40; i++) field.pts.push([20 + 460 * Math.random(), 20 + 460 * Math.random()]);
  drawField();
}

function runMasc() {
  const out = $("mc-out");
  const num = (id) => Number($(id).value);
  try {
    const t0 = performance.now();
    const v = masc_two_moons(
      num("mc-m"), num("mc-noise"), num("mc-seed"), num("mc-n"), num("mc-theta"),
      num("mc-eta0"), num("mc-step"), num("mc-p"), num("mc-k"),
    );
    const ms = performance.now() - t0;
    const p = v.points();
    const labels = v.labels();
    const sources = v.sources();
    const queries = v.queries();
    const acc = v.accuracy();
    const eta = v.eta();
    v.free();

    const c = $("mc-canvas");
    const g = c.getContext("2d");
    g.clearRect(0, 0, c.width, c.height);
    const xs = p.filter((_, i) => i % 2 === 0);
    const ys = p.filter((_, i) => i % 2 === 1);
    const f = frame(c, xs, ys);
    xs.forEach((x, i) => {
      g.fillStyle = COLORS[labels[i] % COLORS.length];
      const r = sources[i] === 2 ? 1.5 : 3;
      g.beginPath();
      g.arc(f.x(x), f.y(ys[i]), r, 0, 2 * Math.PI);
      g.fill();
    });
    g.strokeStyle = "#000";
    g.lineWidth = 2;
    for (const id of queries) {
      g.beginPath();
      g.arc(f.x(xs[id]), f.y(ys[id]), 8, 0, 2 * Math.PI);
      g.stroke();
    }
    g.lineWidth = 1;
    ok(out, `accuracy ${acc.toFixed(4)}, ${queries.length} queries, stopped at η = ${eta.toFixed(3)}, ${ms.toFixed(0)} ms`);
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("sp-run").onclick = runSpectrum;
$("sf-canvas").onclick = (e) => {
  const r = e.target.getBoundingClientRect();
  field.pts.push([e.clientX - r.left, e.clientY - r.top]);
  drawField();
};
$("sf-theta").oninput = drawField;
$("sf-n").onchange = drawField;
$("sf-clear").onclick = () => {
  field.pts = [];
  drawField();
};
$("sf-seed").onclick = scatter;
$("mc-run").onclick = runMasc;
runSpectrum();
scatter();
runMasc();
