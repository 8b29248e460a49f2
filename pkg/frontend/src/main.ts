// Browser entry point: pick a lesson, mount the app.

import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { WebAudioEngine } from "./audio.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("server") ?? "";
  const user = params.get("user") ?? "default";
  const api = new ApiClient(base, user);
  const root = document.getElementById("app")!;
  const picker = document.getElementById("lesson-picker") as HTMLSelectElement;

  const lessons = await api.listLessons();
  if (lessons.length === 0) {
    root.textContent = "No lessons on the server yet. Preprocess one with the CLI or POST /api/lessons.";
    return;
  }
  for (const lesson of lessons) {
    const option = document.createElement("option");
    option.value = lesson.lesson_id;
    option.textContent = `${lesson.lesson_id} (${lesson.duration.toFixed(1)}s)`;
    picker.appendChild(option);
  }
  const app = new App(root, api, new WebAudioEngine());
  const load = () => void app.loadLesson(picker.value);
  picker.addEventListener("change", load);
  const requested = params.get("lesson");
  if (requested) picker.value = requested;
  load();
}

void boot();
