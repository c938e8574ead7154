import init, { suiteOverview, tessellationStudy, slotMesh, answerConsistency, suiteFile } from "./pkg/ifcaudit_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (x == null ? "" : Number(x).toFixed(4));

function guard(fn) {
  return (...args) => {
    $("error").textContent = "";
    try {
      fn(...args);
    } catch (e) {
      $("error").textContent = String(e.message ?? e);
    }
  };
}

function fillRows(table, rows) {
  const body = table.querySelector("tbody");
  body.replaceChildren(...rows.map(({ cells, cls }) => {
    const tr = document.createElement("tr");
    if (cls) tr.className = cls;
    for (const c of cells) {
      const td = document.createElement("td");
      td.textContent = c;
      tr.append(td);
    }
    return tr;
  }));
}

const schema = () => $("schema").value;

const showOverview = guard(() => {
  const items = JSON.parse(suiteOverview(schema()));
  fillRows($("overview"), items.map((i) => ({
    cls: !i.valid ? "invalid" : !i.displayed ? "hidden" : "",
    cells: [i.slot, i.kind, i.valid ? "yes" : "no", i.reasons.join(" "), i.displayed ? "yes" : "no", i.z_relation ?? "", fmt(i.volume)],
  })));
  const slot = $("slot");
  const previous = slot.value;
  slot.replaceChildren(...items.map((i) => new Option(`${i.slot} ${i.kind}`, i.slot)));
  if (items.some((i) => i.slot === previous)) slot.value = previous;
  else slot.value = items.find((i) => i.slot === "C3")?.slot ?? items[0].slot;
  showStudy();
});

const showStudy = guard(() => {
  const rows = JSON.parse(tessellationStudy(schema(), $("slot").value));
  fillRows($("study"), rows.map((r) => ({
    cells: [r.segments, r.triangles, fmt(r.volume), fmt(r.area), r.smooth ? "yes" : "no"],
  })));
  draw();
});

// Orthographic view from (1, -1, 1), painter's order, Lambert shading.
const draw = guard(() => {
  const segments = Number($("segments").value);
  $("segments-value").textContent = segments;
  const soup = slotMesh(schema(), $("slot").value, segments);
  const canvas = $("view");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (soup.length === 0) {
    ctx.fillStyle = "#999";
    ctx.fillText("not displayed", 16, 24);
    return;
  }
  const project = (x, y, z) => [(x + y) * Math.SQRT1_2, z * 0.816 - (y - x) * 0.408, x - y + z];
  const tris = [];
  let min = [Infinity, Infinity], max = [-Infinity, -Infinity];
  for (let i = 0; i < soup.length; i += 9) {
    const p = [0, 3, 6].map((k) => project(soup[i + k], soup[i + k + 1], soup[i + k + 2]));
    const a = [0, 1, 2].map((k) => soup[i + 3 + k] - soup[i + k]);
    const b = [0, 1, 2].map((k) => soup[i + 6 + k] - soup[i + k]);
    const n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    const len = Math.hypot(...n) || 1;
    const light = Math.max(0, (n[0] * 0.3 - n[1] * 0.5 + n[2] * 0.8) / len);
    tris.push({ p, depth: (p[0][2] + p[1][2] + p[2][2]) / 3, light });
    for (const q of p) {
      min = [Math.min(min[0], q[0]), Math.min(min[1], q[1])];
      max = [Math.max(max[0], q[0]), Math.max(max[1], q[1])];
    }
  }
  const scale = 0.85 * Math.min(canvas.width / (max[0] - min[0] || 1), canvas.height / (max[1] - min[1] || 1));
  const sx = (x) => canvas.width / 2 + (x - (min[0] + max[0]) / 2) * scale;
  const sy = (y) => canvas.height / 2 - (y - (min[1] + max[1]) / 2) * scale;
  tris.sort((s, t) => s.depth - t.depth);
  for (const t of tris) {
    const g = Math.round(90 + 150 * t.light);
    ctx.fillStyle = ctx.strokeStyle = `rgb(${g}, ${g}, ${Math.min(255, g + 25)})`;
    ctx.beginPath();
    ctx.moveTo(sx(t.p[0][0]), sy(t.p[0][1]));
    ctx.lineTo(sx(t.p[1][0]), sy(t.p[1][1]));
    ctx.lineTo(sx(t.p[2][0]), sy(t.p[2][1]));
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }
});

const showConsistency = guard(() => {
  const out = $("consistency");
  try {
    const r = JSON.parse(answerConsistency($("answers").value));
    out.replaceChildren(
      ...r.questions.map((q, i) => Object.assign(document.createElement("div"), {
        textContent: `question ${i + 1}: ${q.score.toFixed(3)}`,
      })),
      Object.assign(document.createElement("strong"), { textContent: `consistency ${r.consistency.toFixed(3)}` }),
    );
  } catch (e) {
    out.textContent = String(e.message ?? e);
  }
});

const download = guard(() => {
  const blob = new Blob([suiteFile(schema())], { type: "application/x-step" });
  const a = Object.assign(document.createElement("a"), {
    href: URL.createObjectURL(blob),
    download: `geometry-suite-${schema().toLowerCase()}.ifc`,
  });
  a.click();
  URL.revokeObjectURL(a.href);
});

await init();
$("schema").addEventListener("change", showOverview);
$("slot").addEventListener("change", showStudy);
$("segments").addEventListener("input", draw);
$("answers").addEventListener("input", showConsistency);
$("download").addEventListener("click", download);
showOverview();
showConsistency();
