import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { PredictionDoc, SchemaDoc } from "../src/types.js";

// The real factor schema shipped with the backend package: the form tests
// run against exactly what the service will serve.
export function realSchema(): SchemaDoc {
  const here = dirname(fileURLToPath(import.meta.url));
  const path = join(here, "..", "..", "src", "cgpakit", "resources", "schema.json");
  const doc = JSON.parse(readFileSync(path, "utf-8"));
  return { target: "CGPA", factors: doc.factors };
}

export function samplePrediction(): PredictionDoc {
  return {
    prediction_id: "p-123",
    predicted_cgpa: 3.1415,
    band: "3.00-3.49",
    model_version: 1,
    attribution: {
      base_value: 0.7254,
      prediction: 3.1415 / 4,
      method: "exact_linear",
      contributions: [
        // base + sum(phi) equals prediction exactly (0.7254 + 0.059975)
        { feature: "SH", phi: -0.02, raw_value: "<3 hours" },
        { feature: "PSR", phi: -0.03, raw_value: "No" },
        { feature: "GS", phi: 0.02, raw_value: "Participate" },
        { feature: "HSC", phi: 0.089975, raw_value: 4.8 },
      ],
    },
    recommendations: [
      {
        feature: "PSR", direction: "increase", target: 1, target_label: "Yes",
        gain: 0.05, phi: -0.03, rationale: "PSR currently lowers the prediction",
      },
    ],
  };
}
