import init, { randomInstance, solve, shapes } from "./pkg/mqtc_wasm.js";

const $ = (id) => document.getElementById(id);
const SVG = "http://www.w3.org/2000/svg";

function draw(svg, layout, labels) {
  svg.replaceChildren();
  const add = (tag, attrs) => {
    const el = document.createElementNS(SVG, tag);
    for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
    svg.appendChild(el);
    return el;
  };
  const scale = 1 / 400;
  for (const [u, v] of layout.edges) {
    const a = layout.nodes[u], b = layout.nodes[v];
    add("line", { x1: a.x, y1: a.y, x2: b.x, y2: b.y, "stroke-width": 2 * scale });
  }
  for (const p of layout.nodes) {
    add("circle", { cx: p.x, cy: p.y, r: (p.label ? 5 : 3) * scale, class: p.label ? "leaf" : "inner" });
    if (labels && p.label) {
      const t = add("text", { x: p.x + 6 * scale, y: p.y - 6 * scale, "font-size": 12 * scale });
      t.textContent = p.label;
    }
  }
}

function fail(target, e) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(e.message ?? e);
  target.appendChild(p);
}

function generate() {
  try {
    $("matrix").value = randomInstance(Number($("n").value), Number($("seed").value));
  } catch (e) {
    fail($("result"), e);
  }
}

function runSolve() {
  const mode = document.querySelector("input[name=mode]:checked").value;
  try {
    const r = JSON.parse(solve($("matrix").value, mode, Number($("seed").value), Number($("restarts").value)));
    const pre = document.createElement("pre");
    pre.textContent =
      `${r.newick}\n` +
      `cost ${r.cost.toFixed(6)}  (bounds ${r.min.toFixed(4)} .. ${r.max.toFixed(4)})\n` +
      `normalized score ${r.normalized_score.toFixed(6)}\n` +
      `${r.assignments_evaluated} candidates costed in ${r.elapsed_ms.toFixed(1)} ms`;
    $("result").replaceChildren(pre);
    draw($("tree"), r.layout, true);
  } catch (e) {
    fail($("result"), e);
    $("tree").replaceChildren();
  }
}

function runShapes() {
  try {
    const list = JSON.parse(shapes(Number($("shape-n").value)));
    $("shape-count").textContent = `${list.length} shapes`;
    $("gallery").replaceChildren(
      ...list.map((s, i) => {
        const fig = document.createElement("figure");
        const svg = document.createElementNS(SVG, "svg");
        svg.setAttribute("width", 140);
        svg.setAttribute("height", 140);
        svg.setAttribute("viewBox", "-0.1 -0.1 1.2 1.2");
        draw(svg, s.layout, false);
        const cap = document.createElement("figcaption");
        cap.textContent = `#${i + 1} slots ${s.leaf_slots.join("")}`;
        cap.title = s.code;
        fig.append(svg, cap);
        return fig;
      }),
    );
  } catch (e) {
    fail($("gallery"), e);
  }
}

await init();
$("generate").onclick = generate;
$("solve").onclick = runSolve;
$("shapes").onclick = runShapes;
generate();
