import type { FactorSpec, SchemaDoc } from "./types.js";

// The profile form is generated entirely from the schema the backend
// serves: dropdowns carry exactly the declared levels, numeric inputs
// carry the declared [min, max]. Adding a schema level requires no UI
// change.

export function inputFactors(schema: SchemaDoc): FactorSpec[] {
  return schema.factors.filter((f) => f.acronym !== schema.target);
}

export function buildProfileForm(schema: SchemaDoc, container: HTMLElement): void {
  container.innerHTML = "";
  for (const factor of inputFactors(schema)) {
    const row = document.createElement("div");
    row.className = "field";
    row.dataset.acronym = factor.acronym;

    const label = document.createElement("label");
    label.htmlFor = `factor-${factor.acronym}`;
    label.textContent = factor.units
      ? `${factor.name} (${factor.acronym}, ${factor.units})`
      : `${factor.name} (${factor.acronym})`;
    row.appendChild(label);

    if (factor.kind === "continuous") {
      const input = document.createElement("input");
      input.type = "number";
      input.id = `factor-${factor.acronym}`;
      input.name = factor.acronym;
      input.min = String(factor.range[0]);
      input.max = String(factor.range[1]);
      input.step = "any";
      input.value = "";
      row.appendChild(input);
    } else {
      const select = document.createElement("select");
      select.id = `factor-${factor.acronym}`;
      select.name = factor.acronym;
      for (const level of factor.levels) {
        const option = document.createElement("option");
        option.value = level;
        option.textContent = level;
        select.appendChild(option);
      }
      row.appendChild(select);
    }

    const err = document.createElement("span");
    err.className = "field-error";
    row.appendChild(err);
    container.appendChild(row);
  }
}

export interface FormReading {
  values: Record<string, string | number>;
  errors: Record<string, string>;
}

/** Validation mirrors the fetched schema exactly: same levels, same ranges. */
export function readProfileForm(schema: SchemaDoc, container: HTMLElement): FormReading {
  const values: Record<string, string | number> = {};
  const errors: Record<string, string> = {};
  for (const factor of inputFactors(schema)) {
    const el = container.querySelector<HTMLInputElement | HTMLSelectElement>(
      `[name="${factor.acronym}"]`,
    );
    if (!el) {
      errors[factor.acronym] = "missing control";
      continue;
    }
    if (factor.kind === "continuous") {
      const raw = el.value.trim();
      if (raw === "") {
        errors[factor.acronym] = "required";
        continue;
      }
      const value = Number(raw);
      const [lo, hi] = factor.range;
      if (!Number.isFinite(value) || value < lo || value > hi) {
        errors[factor.acronym] = `must be between ${lo} and ${hi}`;
        continue;
      }
      values[factor.acronym] = value;
    } else {
      const value = el.value;
      if (!factor.levels.includes(value)) {
        errors[factor.acronym] = "pick one of the listed options";
        continue;
      }
      values[factor.acronym] = value;
    }
  }
  return { values, errors };
}

export function showFieldErrors(container: HTMLElement, errors: Record<string, string>): void {
  for (const row of Array.from(container.querySelectorAll<HTMLElement>(".field"))) {
    const acronym = row.dataset.acronym ?? "";
    const span = row.querySelector<HTMLElement>(".field-error");
    if (span) span.textContent = errors[acronym] ?? "";
  }
}
