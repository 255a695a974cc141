import { beforeEach, describe, expect, it } from "vitest";
import { readFeedbackForm, renderResult } from "../src/result.js";
import { samplePrediction } from "./fixtures.js";

function host(): HTMLElement {
  document.body.innerHTML = '<div id="result"></div>';
  return document.getElementById("result")!;
}

describe("result view", () => {
  let container: HTMLElement;

  beforeEach(() => {
    container = host();
    renderResult(container, samplePrediction());
  });

  it("shows the prediction on the 4.0 scale with 2 decimals", () => {
    expect(container.querySelector(".predicted-cgpa")!.textContent).toBe("3.14");
    expect(container.querySelector(".band")!.textContent).toBe("3.00-3.49");
  });

  it("orders bars by |phi| and styles signs apart", () => {
    const rows = Array.from(container.querySelectorAll<HTMLElement>(".bar-row"));
    const phis = rows.map((r) =>
      Math.abs(Number(r.querySelector<HTMLElement>(".bar-phi")!.dataset.phi)));
    const sorted = [...phis].sort((a, b) => b - a);
    expect(phis).toEqual(sorted);
    const first = rows[0];
    expect(first.dataset.feature).toBe("HSC");
    expect(first.querySelector(".bar.positive")).not.toBeNull();
    const psr = rows.find((r) => r.dataset.feature === "PSR")!;
    expect(psr.querySelector(".bar.negative")).not.toBeNull();
  });

  it("displayed base plus displayed bars matches displayed prediction", () => {
    // all numbers are parsed back from the DOM, so this checks exactly what
    // a user sees (rounding-tolerant: 4-decimal display per term)
    const base = Number(/Base value ([-\d.]+)/.exec(
      container.querySelector(".base-value")!.textContent!)![1]);
    const phis = Array.from(container.querySelectorAll<HTMLElement>(".bar-phi"))
      .map((el) => Number(el.textContent));
    const displayedPrediction = Number(
      container.querySelector(".predicted-cgpa")!.textContent) / 4;
    const total = base + phis.reduce((a, b) => a + b, 0);
    const tolerance = 0.00005 * (phis.length + 2) + 0.005 / 4;
    expect(Math.abs(total - displayedPrediction)).toBeLessThan(tolerance);
  });

  it("renders ranked recommendations from the response", () => {
    const items = container.querySelectorAll(".recommendations li");
    expect(items).toHaveLength(1);
    expect(items[0].textContent).toContain("PSR");
    expect(items[0].textContent).toContain("increase");
  });

  it("rejects out-of-range actual CGPA before any request", () => {
    container.querySelector<HTMLInputElement>('[name="actual_cgpa"]')!.value = "4.5";
    const reading = readFeedbackForm(container);
    expect(reading.error).toMatch(/between 0 and 4/);
  });

  it("reads a valid feedback form", () => {
    container.querySelector<HTMLSelectElement>('[name="rating"]')!.value = "4";
    container.querySelector<HTMLInputElement>('[name="actual_cgpa"]')!.value = "3.2";
    container.querySelector<HTMLTextAreaElement>('[name="comment"]')!.value = "close";
    const reading = readFeedbackForm(container);
    expect(reading.error).toBeUndefined();
    expect(reading).toMatchObject({ rating: 4, actual_cgpa: 3.2, comment: "close" });
  });
});
