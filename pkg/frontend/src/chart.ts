import type { MicroLabel, MicroLabelCounts } from "./types.js";

// Micro-label bar chart. Bar heights are the API counts times a fixed
// pixel unit; the count itself is stamped on the bar, so nothing the
// user reads was computed client-side.

export const MICRO_ORDER: MicroLabel[] = ["teamwork", "communication", "innovation"];

export interface Bar {
  label: MicroLabel;
  count: number;
}

export function barData(counts: MicroLabelCounts): Bar[] {
  return MICRO_ORDER.map((label) => ({ label, count: counts[label] }));
}

export const BAR_UNIT_PX = 24;

export function renderBarChart(container: HTMLElement, counts: MicroLabelCounts): void {
  container.textContent = "";
  container.classList.add("bar-chart");
  for (const bar of barData(counts)) {
    const column = document.createElement("div");
    column.className = "bar-column";

    const value = document.createElement("div");
    value.className = "bar-value";
    value.textContent = String(bar.count);

    const rect = document.createElement("div");
    rect.className = "bar";
    rect.dataset.label = bar.label;
    rect.dataset.count = String(bar.count);
    rect.style.height = `${bar.count * BAR_UNIT_PX}px`;

    const label = document.createElement("div");
    label.className = "bar-label";
    label.textContent = bar.label;

    column.append(value, rect, label);
    container.appendChild(column);
  }
}
