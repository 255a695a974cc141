import type { PredictionDoc } from "./types.js";

// Renders the backend's prediction verbatim: a signed horizontal bar per
// feature contribution (ordered by |phi|, positive and negative styled
// apart), the ranked recommendations, and the feedback controls. All
// numbers shown come from the response; the only local operations are
// formatting and bar-width scaling.

export interface FeedbackReading {
  rating: number;
  actual_cgpa?: number;
  comment?: string;
  error?: string;
}

export function renderResult(container: HTMLElement, doc: PredictionDoc): void {
  container.innerHTML = "";

  const headline = document.createElement("div");
  headline.className = "headline";
  const value = document.createElement("span");
  value.className = "predicted-cgpa";
  value.textContent = doc.predicted_cgpa.toFixed(2);
  const band = document.createElement("span");
  band.className = "band";
  band.textContent = doc.band;
  headline.append("Predicted CGPA: ", value, " — band ", band);
  container.appendChild(headline);

  const base = document.createElement("div");
  base.className = "base-value";
  base.textContent = `Base value ${doc.attribution.base_value.toFixed(4)} ` +
    `(model ${doc.attribution.method}, v${doc.model_version})`;
  container.appendChild(base);

  const bars = document.createElement("div");
  bars.className = "bars";
  const ordered = [...doc.attribution.contributions].sort(
    (a, b) => Math.abs(b.phi) - Math.abs(a.phi),
  );
  const largest = Math.max(...ordered.map((c) => Math.abs(c.phi)), 1e-12);
  for (const c of ordered) {
    const row = document.createElement("div");
    row.className = "bar-row";
    row.dataset.feature = c.feature;

    const name = document.createElement("span");
    name.className = "bar-label";
    name.textContent = c.raw_value === undefined || c.raw_value === null
      ? c.feature
      : `${c.feature} = ${c.raw_value}`;

    const track = document.createElement("div");
    track.className = "bar-track";
    const bar = document.createElement("div");
    bar.className = c.phi >= 0 ? "bar positive" : "bar negative";
    bar.style.width = `${(100 * Math.abs(c.phi)) / largest}%`;
    track.appendChild(bar);

    const phi = document.createElement("span");
    phi.className = "bar-phi";
    phi.dataset.phi = String(c.phi);
    phi.textContent = c.phi.toFixed(4);

    row.append(name, track, phi);
    bars.appendChild(row);
  }
  container.appendChild(bars);

  const recs = document.createElement("ol");
  recs.className = "recommendations";
  for (const rec of doc.recommendations) {
    const item = document.createElement("li");
    item.dataset.feature = rec.feature;
    item.textContent = `${rec.feature}: ${rec.direction} toward ` +
      `${rec.target_label} — ${rec.rationale}`;
    recs.appendChild(item);
  }
  if (doc.recommendations.length === 0) {
    const item = document.createElement("li");
    item.className = "no-recs";
    item.textContent = "No actionable improvements found for this profile.";
    recs.appendChild(item);
  }
  container.appendChild(recs);

  container.appendChild(buildFeedbackForm());
}

function buildFeedbackForm(): HTMLElement {
  const form = document.createElement("div");
  form.className = "feedback";
  form.innerHTML = `
    <h3>Was this prediction useful?</h3>
    <label>Rating
      <select name="rating">
        ${[1, 2, 3, 4, 5].map((r) => `<option value="${r}">${r}</option>`).join("")}
      </select>
    </label>
    <label>Actual CGPA (optional)
      <input type="number" name="actual_cgpa" min="0" max="4" step="any" />
    </label>
    <label>Comment (optional)
      <textarea name="comment"></textarea>
    </label>
    <span class="feedback-error"></span>
    <button type="button" name="send-feedback">Send feedback</button>
    <span class="feedback-done"></span>
  `;
  return form;
}

/** Client-side validation gate: out-of-domain values never reach the API. */
export function readFeedbackForm(container: HTMLElement): FeedbackReading {
  const rating = Number(
    container.querySelector<HTMLSelectElement>('[name="rating"]')?.value ?? "0",
  );
  const rawCgpa = container.querySelector<HTMLInputElement>('[name="actual_cgpa"]')
    ?.value.trim() ?? "";
  const comment = container.querySelector<HTMLTextAreaElement>('[name="comment"]')
    ?.value.trim() ?? "";
  const reading: FeedbackReading = { rating };
  if (!Number.isInteger(rating) || rating < 1 || rating > 5) {
    reading.error = "rating must be between 1 and 5";
    return reading;
  }
  if (rawCgpa !== "") {
    const actual = Number(rawCgpa);
    if (!Number.isFinite(actual) || actual < 0 || actual > 4) {
      reading.error = "actual CGPA must be between 0 and 4";
      return reading;
    }
    reading.actual_cgpa = actual;
  }
  if (comment !== "") reading.comment = comment;
  return reading;
}

export function showFeedbackError(container: HTMLElement, message: string): void {
  const span = container.querySelector<HTMLElement>(".feedback-error");
  if (span) span.textContent = message;
}
