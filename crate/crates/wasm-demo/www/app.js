import init, { bound_table, decompose_random, example_det, example_report } from "./pkg/trirank_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function call(f, ...args) {
  const out = JSON.parse(f(...args));
  if (out && out.error) throw new Error(out.error);
  return out;
}

function show(el, fn) {
  try {
    el.classList.remove("err");
    fn();
  } catch (e) {
    el.classList.add("err");
    el.textContent = e.message;
  }
}

function renderTable() {
  const wrap = $("table-wrap");
  show(wrap, () => {
    const rows = call(bound_table, num("lo"), num("hi"));
    const head = "<tr><th>m</th><th>n</th><th>p</th><th>ℝ</th><th>ℂ</th><th>rule (ℝ)</th></tr>";
    const body = rows.map((r) => {
      const [m, n, p] = r.dims;
      const mark = r.real.notes.length ? " *" : "";
      return `<tr><td>${m}</td><td>${n}</td><td>${p}</td><td>${r.real.value}${mark}</td>` +
        `<td>${r.complex.value}</td><td class="rule">${r.real.rule}</td></tr>`;
    });
    wrap.innerHTML = `<table>${head}${body.join("")}</table><p>* conditional note attached</p>`;
  });
}

function decompose() {
  const out = $("dec-out");
  out.textContent = "working…";
  setTimeout(() => show(out, () => {
    const t0 = performance.now();
    const r = call(decompose_random, num("dm"), num("dn"), num("dp"), $("dc").checked, num("ds"));
    const ms = (performance.now() - t0).toFixed(1);
    out.textContent = [
      `shape          ${r.dims.join("×")} over ${r.field}`,
      `terms          ${r.terms}`,
      `shape bound    ${r.shape_bound}`,
      `lower bound    ${r.lower_bound}`,
      `residual       ${r.residual.toExponential(3)}`,
      `method         ${r.method.join(" > ")}`,
      `verdict        ${r.verdict}`,
      ...r.notes.map((n) => `note           ${n}`),
      `time           ${ms} ms`,
    ].join("\n");
  }), 0);
}

function evalDet() {
  const out = $("det-out");
  show(out, () => {
    const r = call(example_det, num("ex"), num("ey"), num("ez"));
    out.textContent = `det = ${r.det.toPrecision(12)}\n(x² + y² + z²)² = ${r.formula.toPrecision(12)}`;
  });
}

function exampleReport() {
  const out = $("ex-out");
  out.textContent = "working…";
  setTimeout(() => show(out, () => {
    const r = call(example_report, 1);
    const lines = [`max relative error of the determinant identity: ${r.det_identity_error.toExponential(2)}`];
    for (const row of r.rows) {
      const member = row.singular_member
        ? "(" + row.singular_member.map(([re, im]) => `${re.toFixed(3)}${im >= 0 ? "+" : ""}${im.toFixed(3)}i`).join(", ") + ")"
        : "none";
      lines.push(`${row.field}: singular member ${member}`);
      lines.push(`  ${row.terms} terms, residual ${row.residual.toExponential(2)}, ${row.verdict}, ${row.method.join(" > ")}`);
    }
    out.textContent = lines.join("\n");
  }), 0);
}

await init();
$("status").textContent = "";
$("bound-go").onclick = renderTable;
$("dec-go").onclick = decompose;
$("ex-go").onclick = exampleReport;
for (const id of ["ex", "ey", "ez"]) $(id).oninput = evalDet;
renderTable();
evalDet();
