import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";

// Full browser-flow test against a live backend: the service process is
// spawned for real, and the page flow runs in jsdom hitting it over HTTP.

const PORT = 8731;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");

let backend: ChildProcess | null = null;

async function waitForBackend(timeoutMs = 90_000): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < timeoutMs) {
    try {
      const r = await fetch(`${BASE}/api/schema`);
      if (r.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 500));
  }
  throw new Error("backend did not come up in time");
}

beforeAll(async () => {
  const work = mkdtempSync(join(tmpdir(), "cgpakit-e2e-"));
  const gen = spawnSync(
    "python3",
    ["-m", "cgpakit.cli", "generate", "--n", "300", "--seed", "5", "--out",
     join(work, "gen")],
    { cwd: REPO_ROOT, encoding: "utf-8" },
  );
  if (gen.status !== 0) throw new Error(`corpus generation failed: ${gen.stderr}`);

  const config = {
    host: "127.0.0.1",
    port: PORT,
    secret: "e2e-secret-0123456789",
    store_path: join(work, "svc.db"),
    artifact_dir: join(work, "artifacts"),
    base_corpus: join(work, "gen", "data.csv"),
    admin_emails: [],
  };
  const configPath = join(work, "service.json");
  writeFileSync(configPath, JSON.stringify(config));
  backend = spawn("python3", ["-m", "cgpakit.cli", "serve", "--config", configPath],
                  { cwd: REPO_ROOT, stdio: "ignore" });
  await waitForBackend();
});

afterAll(() => {
  backend?.kill();
});

describe("end-to-end browser flow against the live service", () => {
  it("register -> predict -> attribution bars -> feedback", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const api = new ApiClient(BASE);
    const app = new App(document.getElementById("app")!, api);
    await app.start();
    const root = document.getElementById("app")!;
    expect(root.dataset.view).toBe("register");

    // register (auto-logs-in)
    const email = `student${Date.now()}@uni.edu`;
    root.querySelector<HTMLInputElement>('[name="email"]')!.value = email;
    root.querySelector<HTMLInputElement>('[name="credential"]')!.value = "longenough1";
    (root.querySelector('[name="submit"]') as HTMLButtonElement).click();
    await vi_waitFor(() => root.dataset.view === "profile");

    // the schema-driven form shows all 22 input factors
    expect(root.querySelectorAll(".field")).toHaveLength(22);

    // fill the profile and predict
    const schema = await api.schema();
    for (const factor of schema.factors) {
      if (factor.acronym === "CGPA") continue;
      const el = root.querySelector<HTMLInputElement>(`[name="${factor.acronym}"]`)!;
      el.value = factor.kind === "continuous"
        ? String(((factor.range[0] + factor.range[1]) / 2))
        : factor.levels[1] ?? factor.levels[0];
    }
    (root.querySelector('[name="predict"]') as HTMLButtonElement).click();
    await vi_waitFor(() => root.dataset.view === "result");

    // displayed bars sum to the displayed prediction (rounding-tolerant)
    const displayed = Number(root.querySelector(".predicted-cgpa")!.textContent);
    expect(displayed).toBeGreaterThanOrEqual(0);
    expect(displayed).toBeLessThanOrEqual(4);
    const base = Number(/Base value ([-\d.]+)/.exec(
      root.querySelector(".base-value")!.textContent!)![1]);
    const phis = Array.from(root.querySelectorAll<HTMLElement>(".bar-phi"))
      .map((el) => Number(el.textContent));
    expect(phis).toHaveLength(22);
    const total = base + phis.reduce((a, b) => a + b, 0);
    const tolerance = 0.00005 * (phis.length + 2) + 0.005 / 4;
    expect(Math.abs(total - displayed / 4)).toBeLessThan(tolerance);

    // out-of-range feedback CGPA is rejected client-side (no request)
    const before = (await api.modelInfo()).feedback_count;
    root.querySelector<HTMLInputElement>('[name="actual_cgpa"]')!.value = "4.5";
    (root.querySelector('[name="send-feedback"]') as HTMLButtonElement).click();
    await vi_waitFor(() =>
      (root.querySelector(".feedback-error")!.textContent ?? "") !== "");
    expect((await api.modelInfo()).feedback_count).toBe(before);

    // valid feedback lands and the model-info count increments
    root.querySelector<HTMLInputElement>('[name="actual_cgpa"]')!.value = "3.4";
    root.querySelector<HTMLSelectElement>('[name="rating"]')!.value = "5";
    (root.querySelector('[name="send-feedback"]') as HTMLButtonElement).click();
    await vi_waitFor(() =>
      (root.querySelector(".feedback-done")!.textContent ?? "").includes("recorded"));
    expect((await api.modelInfo()).feedback_count).toBe(before + 1);
  });
});

async function vi_waitFor(check: () => boolean, timeoutMs = 30_000): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < timeoutMs) {
    if (check()) return;
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
  throw new Error("condition not reached in time");
}
