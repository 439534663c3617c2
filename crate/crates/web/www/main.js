import init, { redundancy_landscape, evolve_series, diagram_dot } from "./pkg/hamdd_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function status(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.className = isError ? "status err" : "status";
}

// Defer heavy work one frame so the status text gets painted first.
function busy(id, work) {
  status(id, "working...");
  requestAnimationFrame(() => setTimeout(() => {
    const t0 = performance.now();
    try {
      const note = work();
      status(id, `${note} (${(performance.now() - t0).toFixed(0)} ms)`);
    } catch (e) {
      status(id, String(e.message ?? e), true);
    }
  }, 0));
}

function heat(v) {
  // 0 -> pale yellow, 1 -> dark red
  const r = 255 - 90 * v, g = 245 - 220 * v, b = 200 - 180 * v;
  return `rgb(${r | 0},${g | 0},${b | 0})`;
}

let landscape = null;

function drawLandscape() {
  const n = num("ls-grid");
  const counts = redundancy_landscape($("ls-model").value, num("ls-sites"), num("ls-steps"), n);
  const cv = $("ls-canvas"), ctx = cv.getContext("2d");
  const cell = cv.width / n;
  let lo = Infinity, hi = -Infinity;
  for (const c of counts) { lo = Math.min(lo, c); hi = Math.max(hi, c); }
  const span = Math.log(hi) - Math.log(lo) || 1;
  ctx.clearRect(0, 0, cv.width, cv.height);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      ctx.fillStyle = heat((Math.log(counts[i * n + j]) - Math.log(lo)) / span);
      // single-site angle grows upwards
      ctx.fillRect(j * cell, (n - 1 - i) * cell, Math.ceil(cell), Math.ceil(cell));
    }
  }
  landscape = { n, counts };
  return `node counts ${lo} to ${hi}`;
}

$("ls-canvas").addEventListener("mousemove", (ev) => {
  if (!landscape) return;
  const { n, counts } = landscape;
  const cv = $("ls-canvas"), rect = cv.getBoundingClientRect();
  const j = Math.min(n - 1, Math.floor((ev.clientX - rect.left) / rect.width * n));
  const i = n - 1 - Math.min(n - 1, Math.floor((ev.clientY - rect.top) / rect.height * n));
  const angle = (k) => (-Math.PI + 2 * Math.PI * k / (n - 1)).toFixed(3);
  $("ls-hover").textContent = `single ${angle(i)}, two-site ${angle(j)}: ${counts[i * n + j]} nodes`;
});

function drawSeries() {
  const rows = evolve_series(
    $("ev-model").value, num("ev-sites"), num("ev-j"), num("ev-field"),
    BigInt(Math.max(0, Math.floor(num("ev-seed")))), num("ev-dt"), num("ev-steps"), $("ev-obs").value,
  );
  const t = [], v = [], nodes = [];
  for (let k = 0; k < rows.length; k += 3) { t.push(rows[k]); v.push(rows[k + 1]); nodes.push(rows[k + 2]); }
  const cv = $("ev-canvas"), ctx = cv.getContext("2d");
  const pad = 40, w = cv.width - 2 * pad, h = cv.height - 2 * pad;
  ctx.clearRect(0, 0, cv.width, cv.height);
  const tmax = t[t.length - 1] || 1;
  const nmax = Math.max(...nodes);
  const x = (ti) => pad + w * ti / tmax;

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.fillText("+1", 8, pad + 4);
  ctx.fillText("-1", 8, pad + h + 4);
  ctx.fillText(String(nmax), pad + w + 6, pad + 4);
  ctx.fillText(`t = ${tmax.toFixed(2)}`, pad + w - 50, pad + h + 18);

  const line = (ys, y, colour) => {
    ctx.strokeStyle = colour;
    ctx.beginPath();
    ys.forEach((yi, k) => (k ? ctx.lineTo(x(t[k]), y(yi)) : ctx.moveTo(x(t[k]), y(yi))));
    ctx.stroke();
  };
  line(nodes, (n) => pad + h - h * n / nmax, "#aaa");
  line(v, (val) => pad + h / 2 - (h / 2) * val, "#1f5fbf");
  return `${t.length} samples, final value ${v[v.length - 1].toFixed(6)}, peak ${nmax} nodes`;
}

function parseDot(dot) {
  const nodes = new Map();
  const edges = [];
  for (const line of dot.split("\n")) {
    let m = line.match(/^\s*(n\d+) \[shape=circle, label="q(\d+)"\]/);
    if (m) { nodes.set(m[1], Number(m[2])); continue; }
    m = line.match(/^\s*(\w+) -> (\w+) \[label="([^"]*)"(?:, taillabel="(\w+)")?\]/);
    if (m) edges.push({ from: m[1], to: m[2], weight: m[3], port: m[4] ?? "" });
  }
  return { nodes, edges };
}

function drawDiagram() {
  const dot = diagram_dot($("dd-obj").value);
  $("dd-dot").textContent = dot;
  const { nodes, edges } = parseDot(dot);
  const levels = Math.max(-1, ...nodes.values()) + 1;
  const byLevel = Array.from({ length: levels }, () => []);
  for (const [id, lvl] of nodes) byLevel[lvl].push(id);
  const width = 640, rowH = 90, height = (levels + 2) * rowH;
  const pos = new Map();
  pos.set("root", [width / 2, 20]);
  byLevel.forEach((ids, lvl) => ids.forEach((id, k) => {
    pos.set(id, [width * (k + 1) / (ids.length + 1), 20 + rowH * (levels - lvl)]);
  }));
  pos.set("t", [width / 2, 20 + rowH * (levels + 1)]);

  const parts = [];
  const seen = new Map();
  for (const e of edges) {
    const [x1, y1] = pos.get(e.from), [x2, y2] = pos.get(e.to);
    const key = `${e.from}-${e.to}`;
    const k = seen.get(key) ?? 0;
    seen.set(key, k + 1);
    const bend = (k % 2 ? -1 : 1) * Math.ceil(k / 2) * 28;
    const cx = (x1 + x2) / 2 + bend, cy = (y1 + y2) / 2;
    parts.push(`<path d="M${x1},${y1} Q${cx},${cy} ${x2},${y2}" fill="none" stroke="#555"/>`);
    const label = e.port ? `${e.port}: ${e.weight}` : e.weight;
    parts.push(`<text x="${(x1 + 2 * cx + x2) / 4 + 4}" y="${(y1 + y2) / 2}" font-size="11" fill="#1f5fbf">${label}</text>`);
  }
  for (const [id, [x, y]] of pos) {
    if (id === "root") parts.push(`<circle cx="${x}" cy="${y}" r="3" fill="#222"/>`);
    else if (id === "t") parts.push(`<rect x="${x - 12}" y="${y - 12}" width="24" height="24" fill="#fff" stroke="#222"/><text x="${x - 3}" y="${y + 4}">1</text>`);
    else parts.push(`<circle cx="${x}" cy="${y}" r="15" fill="#fff" stroke="#222"/><text x="${x - 9}" y="${y + 4}" font-size="12">q${nodes.get(id)}</text>`);
  }
  $("dd-svg").innerHTML = `<svg width="${width}" height="${height}" xmlns="http://www.w3.org/2000/svg">${parts.join("")}</svg>`;
  return `${nodes.size} nodes`;
}

await init();
$("ls-run").onclick = () => busy("ls-status", drawLandscape);
$("ev-run").onclick = () => busy("ev-status", drawSeries);
$("dd-run").onclick = () => busy("dd-status", drawDiagram);
busy("dd-status", drawDiagram);
