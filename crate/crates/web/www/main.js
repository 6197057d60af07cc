import init, { fc_table, kernel_curve, nc_partitions } from "./pkg/wickgraph_web.js";

function call(f, ...args) {
  try {
    return [JSON.parse(f(...args)), null];
  } catch (e) {
    return [null, String(e)];
  }
}

function showTable(ev) {
  ev?.preventDefault();
  const f = new FormData(document.getElementById("fc-form"));
  const out = document.getElementById("fc-out");
  const [t, err] = call(fc_table, f.get("activation"), +f.get("k"), +f.get("depth"), +f.get("x2"));
  if (err) {
    out.innerHTML = `<p class="err">${err}</p>`;
    return;
  }
  let html = "<table><tr><th>k</th>";
  for (let l = 1; l <= t.depth; l++) html += `<th>L=${l}</th>`;
  html += "</tr>";
  for (let k = 1; k <= t.k_max; k++) {
    html += `<tr><th>${k}</th>`;
    for (let l = 1; l <= t.depth; l++) {
      html += `<td title="${t.m_rational[k - 1][l]}">${t.m_float[k - 1][l].toPrecision(9)}</td>`;
    }
    html += "</tr>";
  }
  out.innerHTML = html + "</table>";
}

function plotKernel(ev) {
  ev?.preventDefault();
  const f = new FormData(document.getElementById("kernel-form"));
  const err = document.getElementById("kernel-err");
  const canvas = document.getElementById("kernel-plot");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const [c, e] = call(kernel_curve, f.get("activation"), +f.get("depth"), 200);
  err.textContent = e ?? "";
  if (e) return;
  const all = c.gp.concat(c.ntk);
  const lo = Math.min(0, ...all), hi = Math.max(...all) || 1;
  const pad = 30, w = canvas.width - 2 * pad, h = canvas.height - 2 * pad;
  const px = (t) => pad + (w * t) / Math.PI;
  const py = (v) => pad + h - (h * (v - lo)) / (hi - lo);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, py(0));
  ctx.lineTo(pad + w, py(0));
  ctx.stroke();
  for (const [ys, color, name, row] of [[c.gp, "#1f77b4", "GP kernel", 0], [c.ntk, "#d62728", "NTK", 1]]) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    ys.forEach((v, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, px(c.theta[i]), py(v)));
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(name, pad + w - 70, pad + 12 * row);
  }
  ctx.fillStyle = "#333";
  ctx.fillText("0", pad - 4, canvas.height - 10);
  ctx.fillText("π", pad + w - 4, canvas.height - 10);
  ctx.fillText(hi.toPrecision(3), 2, pad);
}

function chords(ctx, blocks, k, r, cx, cy, color, offset) {
  const pt = (i) => {
    const a = (2 * Math.PI * (i - 1 + offset)) / k - Math.PI / 2;
    return [cx + r * Math.cos(a), cy + r * Math.sin(a)];
  };
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  for (const b of blocks) {
    ctx.beginPath();
    b.forEach((v, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, ...pt(v)));
    if (b.length > 2) ctx.closePath();
    ctx.stroke();
    for (const v of b) {
      ctx.beginPath();
      ctx.arc(...pt(v), 2.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}

function listPartitions(ev) {
  ev?.preventDefault();
  const k = +new FormData(document.getElementById("nc-form")).get("k");
  const out = document.getElementById("nc-out");
  out.innerHTML = "";
  const [ps, err] = call(nc_partitions, k);
  if (err) {
    out.innerHTML = `<p class="err">${err}</p>`;
    return;
  }
  for (const p of ps) {
    const fig = document.createElement("figure");
    const cv = document.createElement("canvas");
    cv.width = cv.height = 90;
    const ctx = cv.getContext("2d");
    chords(ctx, p.blocks, k, 38, 45, 45, "#1f77b4", 0);
    chords(ctx, p.dual, k, 30, 45, 45, "#d62728", 0.5);
    const cap = document.createElement("figcaption");
    const fmt = (bs) => bs.map((b) => "{" + b.join(",") + "}").join("");
    cap.textContent = `${fmt(p.blocks)} → ${fmt(p.dual)}`;
    fig.append(cv, cap);
    out.append(fig);
  }
}

await init();
document.getElementById("fc-form").addEventListener("submit", showTable);
document.getElementById("kernel-form").addEventListener("submit", plotKernel);
document.getElementById("nc-form").addEventListener("submit", listPartitions);
showTable();
plotKernel();
listPartitions();
