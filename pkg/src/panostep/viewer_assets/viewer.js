/* Minimal embedded world viewer: equirectangular panorama on the inside of a
 * sphere via a fragment-shader raycast, directional hotspots for edges, and
 * URL-hash deep links (#scene=<id>). Reads world.json next to this file.
 *
 * Conventions match the pipeline: texture u = azimuth/2pi, v = polar/pi,
 * azimuth 0 along +x, camera yaw measured as azimuth.
 */
"use strict";

(function () {
  const canvas = document.getElementById("view");
  const hud = document.getElementById("hud");
  const errBox = document.getElementById("error");
  const gl = canvas.getContext("webgl2") || canvas.getContext("webgl");
  if (!gl) { showError("WebGL is not available in this browser."); return; }

  const VSRC = [
    "attribute vec2 aPos;",
    "varying vec2 vNdc;",
    "void main(){ vNdc = aPos; gl_Position = vec4(aPos, 0.0, 1.0); }",
  ].join("\n");
  const FSRC = [
    "precision highp float;",
    "varying vec2 vNdc;",
    "uniform sampler2D uMap;",
    "uniform float uYaw, uPitch, uFovY, uAspect;",
    "const float PI = 3.141592653589793;",
    "void main(){",
    "  float ty = tan(uFovY * 0.5);",
    "  vec3 d = vec3(1.0, vNdc.x * ty * uAspect, vNdc.y * ty);",
    "  float cp = cos(uPitch), sp = sin(uPitch);",
    "  d = vec3(cp*d.x - sp*d.z, d.y, sp*d.x + cp*d.z);",
    "  float cy = cos(uYaw), sy = sin(uYaw);",
    "  d = vec3(cy*d.x - sy*d.y, sy*d.x + cy*d.y, d.z);",
    "  float az = atan(d.y, d.x);",
    "  float polar = acos(clamp(d.z / length(d), -1.0, 1.0));",
    "  vec2 uv = vec2(fract(az / (2.0*PI)), polar / PI);",
    "  gl_FragColor = texture2D(uMap, uv);",
    "}",
  ].join("\n");

  function compile(type, src) {
    const sh = gl.createShader(type);
    gl.shaderSource(sh, src);
    gl.compileShader(sh);
    if (!gl.getShaderParameter(sh, gl.COMPILE_STATUS))
      throw new Error(gl.getShaderInfoLog(sh));
    return sh;
  }
  const prog = gl.createProgram();
  gl.attachShader(prog, compile(gl.VERTEX_SHADER, VSRC));
  gl.attachShader(prog, compile(gl.FRAGMENT_SHADER, FSRC));
  gl.linkProgram(prog);
  gl.useProgram(prog);
  const quad = gl.createBuffer();
  gl.bindBuffer(gl.ARRAY_BUFFER, quad);
  gl.bufferData(gl.ARRAY_BUFFER,
    new Float32Array([-1, -1, 1, -1, 1, 1, 1, 1, -1, 1, -1, -1]), gl.STATIC_DRAW);
  const aPos = gl.getAttribLocation(prog, "aPos");
  gl.enableVertexAttribArray(aPos);
  gl.vertexAttribPointer(aPos, 2, gl.FLOAT, false, 8, 0);
  const uni = (n) => gl.getUniformLocation(prog, n);

  const state = {
    manifest: null,
    sceneId: null,
    yaw: 0, pitch: 0,
    fovY: (75 * Math.PI) / 180,
    texture: null,
    images: new Map(), // id -> HTMLImageElement promise
  };

  function showError(msg) {
    errBox.style.display = "block";
    errBox.textContent = msg;
  }

  function sceneById(id) {
    return state.manifest.scenes.find((s) => s.id === id) || null;
  }
  function edgesFrom(id) {
    return state.manifest.edges.filter((e) => e.from === id);
  }

  function loadImage(id) {
    if (state.images.has(id)) return state.images.get(id);
    const scene = sceneById(id);
    const p = new Promise((resolve, reject) => {
      if (!scene) { reject(new Error("unknown scene " + id)); return; }
      const img = new Image();
      img.onload = () => resolve(img);
      img.onerror = () => reject(new Error("missing image for scene " + id));
      img.src = scene.image;
    });
    state.images.set(id, p);
    return p;
  }

  function uploadTexture(img) {
    const tex = gl.createTexture();
    gl.bindTexture(gl.TEXTURE_2D, tex);
    gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, gl.RGBA, gl.UNSIGNED_BYTE, img);
    const pow2 = (n) => (n & (n - 1)) === 0;
    const wrap = (gl instanceof WebGL2RenderingContext) || (pow2(img.width) && pow2(img.height))
      ? gl.REPEAT : gl.CLAMP_TO_EDGE;
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, wrap);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);
    return tex;
  }

  function draw() {
    const w = canvas.clientWidth, h = canvas.clientHeight;
    if (canvas.width !== w || canvas.height !== h) {
      canvas.width = w; canvas.height = h;
      gl.viewport(0, 0, w, h);
    }
    gl.uniform1f(uni("uYaw"), state.yaw);
    gl.uniform1f(uni("uPitch"), state.pitch);
    gl.uniform1f(uni("uFovY"), state.fovY);
    gl.uniform1f(uni("uAspect"), w / Math.max(h, 1));
    gl.uniform1i(uni("uMap"), 0);
    gl.drawArrays(gl.TRIANGLES, 0, 6);
    placeHotspots();
  }

  function placeHotspots() {
    document.querySelectorAll(".hotspot").forEach((el) => el.remove());
    if (!state.sceneId) return;
    const w = canvas.clientWidth, h = canvas.clientHeight;
    const fovX = 2 * Math.atan(Math.tan(state.fovY / 2) * (w / Math.max(h, 1)));
    for (const edge of edgesFrom(state.sceneId)) {
      const az = (edge.displacement.direction * Math.PI) / 180;
      let rel = az - state.yaw;
      rel = ((rel + Math.PI) % (2 * Math.PI) + 2 * Math.PI) % (2 * Math.PI) - Math.PI;
      if (Math.abs(rel) > fovX / 2) continue;
      const el = document.createElement("button");
      el.className = "hotspot";
      el.textContent = "→ " + edge.to;
      el.style.left = (0.5 + rel / fovX) * w + "px";
      el.style.top = 0.58 * h + "px";
      el.onclick = () => navigate(edge);
      document.body.appendChild(el);
    }
  }

  function updateHud() {
    const outgoing = edgesFrom(state.sceneId).length;
    hud.textContent = "scene " + state.sceneId + "  ·  " + outgoing +
      " move" + (outgoing === 1 ? "" : "s") + "  ·  drag to look";
  }

  async function showScene(id, yaw) {
    const scene = sceneById(id);
    if (!scene) { showError("unknown scene id: " + id); return; }
    let img;
    try {
      img = await loadImage(id);
    } catch (e) {
      showError(e.message);
      return;
    }
    errBox.style.display = "none";
    if (state.texture) gl.deleteTexture(state.texture);
    state.texture = uploadTexture(img);
    gl.activeTexture(gl.TEXTURE0);
    gl.bindTexture(gl.TEXTURE_2D, state.texture);
    state.sceneId = id;
    if (yaw !== undefined) state.yaw = yaw;
    if (location.hash !== "#scene=" + encodeURIComponent(id))
      location.hash = "scene=" + encodeURIComponent(id);
    updateHud();
    draw();
    for (const e of edgesFrom(id)) loadImage(e.to); // preload neighbors
  }

  function navigate(edge) {
    if (edge.from !== state.sceneId) return; // stale hotspot after reload
    canvas.classList.add("fading");
    setTimeout(() => {
      showScene(edge.to, (edge.displacement.direction * Math.PI) / 180)
        .then(() => canvas.classList.remove("fading"));
    }, 180);
  }

  // drag to look
  let dragging = null;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = { x: e.clientX, y: e.clientY };
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!dragging) return;
    const scale = state.fovY / canvas.clientHeight;
    state.yaw += (e.clientX - dragging.x) * scale;
    state.pitch -= (e.clientY - dragging.y) * scale;
    const lim = Math.PI / 2 - 0.01;
    state.pitch = Math.max(-lim, Math.min(lim, state.pitch));
    dragging = { x: e.clientX, y: e.clientY };
    draw();
  });
  canvas.addEventListener("pointerup", () => { dragging = null; });
  window.addEventListener("resize", draw);
  window.addEventListener("hashchange", () => {
    const m = location.hash.match(/scene=([^&]+)/);
    if (m && decodeURIComponent(m[1]) !== state.sceneId)
      showScene(decodeURIComponent(m[1]));
  });

  fetch("world.json")
    .then((r) => {
      if (!r.ok) throw new Error("world.json not found (" + r.status + ")");
      return r.json();
    })
    .then((manifest) => {
      if (!manifest.scenes || !manifest.scenes.length)
        throw new Error("manifest lists no scenes");
      state.manifest = manifest;
      const m = location.hash.match(/scene=([^&]+)/);
      const id = m ? decodeURIComponent(m[1]) : manifest.scenes[0].id;
      showScene(sceneById(id) ? id : manifest.scenes[0].id);
    })
    .catch((e) => showError(e.message));
})();
