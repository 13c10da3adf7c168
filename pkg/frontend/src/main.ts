/** DOM shell: wires the sketch canvas, toolbar, and result list to the
 * pure modules. All logic that can live outside the DOM does (state,
 * downsample, api, view) — this file only shuttles events and pixels.
 */

import { ApiClient } from "./api.js";
import { CANVAS_SIZE, QUERY_SIZE, CanvasState, Tool, beginStroke, clear,
         emptyState, extendStroke, hasContent, replaceWithUpload, undo } from "./state.js";
import { downsampleToQuery, hasInk } from "./downsample.js";
import { ResultViewModel, bannerMessage, buildViewModel } from "./view.js";

const SERVICE_URL = (window as unknown as { RINGSKETCH_URL?: string }).RINGSKETCH_URL
  ?? "http://127.0.0.1:8000";

const client = new ApiClient(SERVICE_URL);

let state: CanvasState = emptyState();
let tool: Tool = "draw";
let drawing = false;
let backgroundImage: HTMLImageElement | null = null;
let lastQueryPng: Blob | null = null;
let inFlight: AbortController | null = null;

const canvas = document.getElementById("pad") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const bannerText = document.getElementById("banner-text")!;
const results = document.getElementById("results")!;
const scorerSelect = document.getElementById("scorer") as HTMLSelectElement;
const topKInput = document.getElementById("top-k") as HTMLInputElement;
const widthInput = document.getElementById("stroke-width") as HTMLInputElement;
const uploadInput = document.getElementById("upload") as HTMLInputElement;

function render(): void {
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, CANVAS_SIZE, CANVAS_SIZE);
  if (backgroundImage) {
    ctx.drawImage(backgroundImage, 0, 0, CANVAS_SIZE, CANVAS_SIZE);
  }
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  for (const stroke of state.strokes) {
    ctx.strokeStyle = stroke.tool === "draw" ? "#1a1a1a" : "#ffffff";
    ctx.lineWidth = stroke.width;
    ctx.beginPath();
    const [first, ...rest] = stroke.points;
    if (!first) continue;
    ctx.moveTo(first[0], first[1]);
    if (rest.length === 0) ctx.lineTo(first[0] + 0.01, first[1]);
    for (const [x, y] of rest) ctx.lineTo(x, y);
    ctx.stroke();
  }
}

function canvasPoint(event: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [
    ((event.clientX - rect.left) / rect.width) * CANVAS_SIZE,
    ((event.clientY - rect.top) / rect.height) * CANVAS_SIZE,
  ];
}

canvas.addEventListener("pointerdown", (event) => {
  drawing = true;
  canvas.setPointerCapture(event.pointerId);
  const [x, y] = canvasPoint(event);
  state = beginStroke(state, tool, Number(widthInput.value), x, y);
  render();
});

canvas.addEventListener("pointermove", (event) => {
  if (!drawing) return;
  const [x, y] = canvasPoint(event);
  state = extendStroke(state, x, y);
  render();
});

canvas.addEventListener("pointerup", () => {
  drawing = false;
});

function bindTool(id: string, value: Tool): void {
  document.getElementById(id)!.addEventListener("click", () => {
    tool = value;
    document.querySelectorAll(".tool").forEach((el) => el.classList.remove("active"));
    document.getElementById(id)!.classList.add("active");
  });
}
bindTool("tool-draw", "draw");
bindTool("tool-erase", "erase");

document.getElementById("undo")!.addEventListener("click", () => {
  state = undo(state);
  render();
});

document.getElementById("clear")!.addEventListener("click", () => {
  state = clear(state);
  backgroundImage = null;
  lastQueryPng = null;
  render();
});

uploadInput.addEventListener("change", () => {
  const file = uploadInput.files?.[0];
  if (!file) return;
  const reader = new FileReader();
  reader.onload = () => {
    const dataUrl = String(reader.result);
    const image = new Image();
    image.onload = () => {
      backgroundImage = image;
      state = replaceWithUpload(state, dataUrl);
      render();
    };
    image.src = dataUrl;
  };
  reader.readAsDataURL(file);
  uploadInput.value = "";
});

function showBanner(message: string): void {
  bannerText.textContent = message;
  banner.classList.remove("hidden");
}

document.getElementById("banner-dismiss")!.addEventListener("click", () => {
  banner.classList.add("hidden");
});

function renderResults(model: ResultViewModel): void {
  results.innerHTML = "";
  const heading = document.createElement("p");
  heading.className = "results-meta";
  heading.textContent =
    `top ${model.cards.length} of ${model.gallerySize} objects — scorer: ${model.scorer}`;
  results.appendChild(heading);
  for (const card of model.cards) {
    const el = document.createElement("div");
    el.className = "card";
    const img = document.createElement("img");
    img.loading = "lazy";
    img.src = card.thumbnailUrl;
    img.alt = card.objectId;
    el.appendChild(img);
    const label = document.createElement("div");
    label.className = "card-label";
    label.textContent = `${card.objectId} — ${card.score}`;
    el.appendChild(label);
    const grid = document.createElement("div");
    grid.className = "ring-grid hidden";
    el.addEventListener("click", () => {
      if (grid.classList.contains("hidden") && grid.childElementCount === 0) {
        for (const row of card.ringGrid) {
          for (const url of row) {
            const cell = document.createElement("img");
            cell.loading = "lazy";
            cell.src = url;
            cell.alt = card.objectId;
            grid.appendChild(cell);
          }
        }
      }
      grid.classList.toggle("hidden");
    });
    el.appendChild(grid);
    results.appendChild(el);
  }
}

async function queryWith(png: Blob): Promise<void> {
  inFlight?.abort();
  inFlight = new AbortController();
  try {
    const response = await client.query(png, {
      topK: Number(topKInput.value) || 10,
      scorer: scorerSelect.value || undefined,
      signal: inFlight.signal,
    });
    banner.classList.add("hidden");
    renderResults(buildViewModel(response, SERVICE_URL));
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    showBanner(bannerMessage(err));
  }
}

document.getElementById("submit")!.addEventListener("click", () => {
  if (!hasContent(state)) {
    showBanner("Draw something (or upload a sketch) before submitting.");
    return;
  }
  const rgba = ctx.getImageData(0, 0, CANVAS_SIZE, CANVAS_SIZE).data;
  const query = downsampleToQuery(rgba, CANVAS_SIZE, QUERY_SIZE);
  if (!hasInk(query)) {
    showBanner("The sketch is empty after downsampling — draw darker strokes.");
    return;
  }
  const out = document.createElement("canvas");
  out.width = QUERY_SIZE;
  out.height = QUERY_SIZE;
  const outCtx = out.getContext("2d")!;
  const imageData = outCtx.createImageData(QUERY_SIZE, QUERY_SIZE);
  for (let i = 0; i < query.pixels.length; i++) {
    const v = query.pixels[i]!;
    imageData.data[i * 4] = v;
    imageData.data[i * 4 + 1] = v;
    imageData.data[i * 4 + 2] = v;
    imageData.data[i * 4 + 3] = 255;
  }
  outCtx.putImageData(imageData, 0, 0);
  out.toBlob((blob) => {
    if (!blob) {
      showBanner("Could not encode the sketch as PNG.");
      return;
    }
    lastQueryPng = blob;
    void queryWith(blob);
  }, "image/png");
});

scorerSelect.addEventListener("change", () => {
  if (lastQueryPng) void queryWith(lastQueryPng);
});

render();
