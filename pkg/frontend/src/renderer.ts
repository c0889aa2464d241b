/** WebGL equirectangular renderer: panorama on the inside of a sphere.
 *
 * A fullscreen quad's fragment shader turns each pixel into a view ray,
 * rotates it by yaw/pitch, and samples the panorama at
 * u = azimuth/2pi, v = polar/pi - the same texel convention the warp
 * pipeline uses for pixel centers.
 */

import type { ViewVector } from "./types.js";

export interface SceneRenderer {
  setImage(image: TexImageSource & { width: number; height: number }): void;
  render(view: ViewVector): void;
  dispose(): void;
}

const VERTEX_SRC = `
attribute vec2 aPos;
varying vec2 vNdc;
void main() { vNdc = aPos; gl_Position = vec4(aPos, 0.0, 1.0); }
`;

const FRAGMENT_SRC = `
precision highp float;
varying vec2 vNdc;
uniform sampler2D uMap;
uniform float uYaw, uPitch, uFovY, uAspect;
const float PI = 3.141592653589793;
void main() {
  float ty = tan(uFovY * 0.5);
  vec3 d = vec3(1.0, vNdc.x * ty * uAspect, vNdc.y * ty);
  float cp = cos(uPitch), sp = sin(uPitch);
  d = vec3(cp * d.x - sp * d.z, d.y, sp * d.x + cp * d.z);
  float cy = cos(uYaw), sy = sin(uYaw);
  d = vec3(cy * d.x - sy * d.y, sy * d.x + cy * d.y, d.z);
  float az = atan(d.y, d.x);
  float polar = acos(clamp(d.z / length(d), -1.0, 1.0));
  gl_FragColor = texture2D(uMap, vec2(fract(az / (2.0 * PI)), polar / PI));
}
`;

function compileShader(gl: WebGLRenderingContext, type: number, source: string) {
  const shader = gl.createShader(type);
  if (!shader) throw new Error("could not allocate shader");
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(gl.getShaderInfoLog(shader) ?? "shader compile failed");
  }
  return shader;
}

function isPowerOfTwo(n: number): boolean {
  return (n & (n - 1)) === 0;
}

export function createWebGLRenderer(canvas: HTMLCanvasElement): SceneRenderer {
  const gl =
    (canvas.getContext("webgl2") as WebGL2RenderingContext | null) ??
    (canvas.getContext("webgl") as WebGLRenderingContext | null);
  if (!gl) throw new Error("WebGL is not available");
  const isGl2 = typeof WebGL2RenderingContext !== "undefined" && gl instanceof WebGL2RenderingContext;

  const program = gl.createProgram()!;
  gl.attachShader(program, compileShader(gl, gl.VERTEX_SHADER, VERTEX_SRC));
  gl.attachShader(program, compileShader(gl, gl.FRAGMENT_SHADER, FRAGMENT_SRC));
  gl.linkProgram(program);
  if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
    throw new Error(gl.getProgramInfoLog(program) ?? "program link failed");
  }
  gl.useProgram(program);

  const quad = gl.createBuffer();
  gl.bindBuffer(gl.ARRAY_BUFFER, quad);
  gl.bufferData(
    gl.ARRAY_BUFFER,
    new Float32Array([-1, -1, 1, -1, 1, 1, 1, 1, -1, 1, -1, -1]),
    gl.STATIC_DRAW,
  );
  const aPos = gl.getAttribLocation(program, "aPos");
  gl.enableVertexAttribArray(aPos);
  gl.vertexAttribPointer(aPos, 2, gl.FLOAT, false, 8, 0);

  let texture: WebGLTexture | null = null;

  return {
    setImage(image) {
      if (texture) gl.deleteTexture(texture);
      texture = gl.createTexture();
      gl.bindTexture(gl.TEXTURE_2D, texture);
      gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, gl.RGBA, gl.UNSIGNED_BYTE, image);
      // REPEAT hides the longitude seam; WebGL1 only allows it for pow2
      const wrapS =
        isGl2 || (isPowerOfTwo(image.width) && isPowerOfTwo(image.height))
          ? gl.REPEAT
          : gl.CLAMP_TO_EDGE;
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, wrapS);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);
    },
    render(view) {
      const width = canvas.clientWidth || canvas.width;
      const height = canvas.clientHeight || canvas.height;
      if (canvas.width !== width || canvas.height !== height) {
        canvas.width = width;
        canvas.height = height;
        gl.viewport(0, 0, width, height);
      }
      gl.uniform1f(gl.getUniformLocation(program, "uYaw"), view.yaw);
      gl.uniform1f(gl.getUniformLocation(program, "uPitch"), view.pitch);
      gl.uniform1f(gl.getUniformLocation(program, "uFovY"), view.fovY);
      gl.uniform1f(gl.getUniformLocation(program, "uAspect"), width / Math.max(height, 1));
      gl.uniform1i(gl.getUniformLocation(program, "uMap"), 0);
      gl.activeTexture(gl.TEXTURE0);
      gl.bindTexture(gl.TEXTURE_2D, texture);
      gl.drawArrays(gl.TRIANGLES, 0, 6);
    },
    dispose() {
      if (texture) gl.deleteTexture(texture);
      gl.deleteBuffer(quad);
      gl.deleteProgram(program);
    },
  };
}
