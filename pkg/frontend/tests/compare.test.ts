import { describe, expect, it } from "vitest";

import { renderComparisonTable, sortRows } from "../src/compare.js";
import { applicants, applicantsBody } from "./fixtures.js";

describe("comparison table", () => {
  it("rows equal the GET /applicants body verbatim", () => {
    const container = document.createElement("div");
    renderComparisonTable(container, applicants);
    const rows = container.querySelectorAll("tbody tr");
    expect(rows.length).toBe(applicants.length);
    const expected = JSON.parse(applicantsBody) as typeof applicants;
    rows.forEach((tr, i) => {
      const cells = [...tr.querySelectorAll("td")].map((td) => td.textContent);
      const row = expected[i];
      expect(cells).toEqual([
        row.applicant_id,
        String(row.letters_count),
        row.highlight_proportion,
        String(row.micro_label_counts.teamwork),
        String(row.micro_label_counts.communication),
        String(row.micro_label_counts.innovation),
      ]);
    });
  });

  it("renders the 4-decimal proportion strings without re-rounding", () => {
    const container = document.createElement("div");
    renderComparisonTable(container, applicants);
    for (const row of applicants) {
      expect(container.textContent).toContain(row.highlight_proportion);
      expect(row.highlight_proportion).toMatch(/^\d+\.\d{4}$/);
    }
  });

  it("sorts deterministically by any column", () => {
    const byTeamwork = sortRows(applicants, "teamwork");
    expect(sortRows(applicants, "teamwork")).toEqual(byTeamwork);
    const counts = byTeamwork.map((row) => row.micro_label_counts.teamwork);
    expect(counts).toEqual([...counts].sort((a, b) => a - b));

    const descending = sortRows(applicants, "teamwork", true);
    expect(descending.map((row) => row.micro_label_counts.teamwork)).toEqual(
      [...counts].sort((a, b) => b - a),
    );
  });

  it("ties break on applicant_id", () => {
    const tied = [
      { ...applicants[0], applicant_id: "zeta" },
      { ...applicants[0], applicant_id: "alpha" },
    ];
    const sorted = sortRows(tied, "letters_count");
    expect(sorted.map((row) => row.applicant_id)).toEqual(["alpha", "zeta"]);
  });
});
