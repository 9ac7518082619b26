import { fetchStats } from "./api";
import { createApp } from "./app";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  let structures = ["default"];
  try {
    const stats = await fetchStats("");
    structures = Object.keys(stats.structures).sort();
  } catch {
    // stats endpoint unreachable; fall back to the default structure
  }
  createApp(root, { baseUrl: "", structures });
}

void boot();
