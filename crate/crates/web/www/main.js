import init, { trace_svg, box_dimension, interpolation_svg } from "./pkg/sle_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function inputs() {
  return [$("kind").value, num("parameter"), num("kappa"), num("steps"), BigInt(num("seed"))];
}

function guarded(out, f) {
  return () => {
    out.classList.remove("error");
    try {
      f();
    } catch (e) {
      out.classList.add("error");
      out.textContent = e.message ?? String(e);
    }
  };
}

await init();

$("draw").onclick = guarded($("trace"), () => {
  $("trace").innerHTML = trace_svg(...inputs());
});

$("measure").onclick = guarded($("result"), () => {
  const d = box_dimension(...inputs());
  $("result").textContent =
    `D = ${d.slope.toFixed(3)} (R² ${d.r_squared.toFixed(4)}, ${d.scales} scales)`;
  d.free();
});

$("interpolate").onclick = guarded($("interp"), () => {
  $("interp").innerHTML = interpolation_svg(
    num("kappa"), num("coarse"), num("exponent"), num("factor"), BigInt(num("seed")));
});

$("draw").click();
$("interpolate").click();
