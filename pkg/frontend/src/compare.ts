import type { ApplicantRow } from "./types.js";

// Side-by-side applicant comparison: rows are the GET /applicants body
// verbatim; sorting is deterministic (applicant_id breaks every tie).

export type SortColumn =
  | "applicant_id"
  | "letters_count"
  | "highlight_proportion"
  | "teamwork"
  | "communication"
  | "innovation";

function sortKey(row: ApplicantRow, column: SortColumn): string | number {
  switch (column) {
    case "applicant_id":
      return row.applicant_id;
    case "letters_count":
      return row.letters_count;
    case "highlight_proportion":
      // fixed-width decimal strings order correctly as strings, but the
      // numeric key keeps this robust to mixed widths
      return Number(row.highlight_proportion);
    default:
      return row.micro_label_counts[column];
  }
}

export function sortRows(
  rows: ApplicantRow[],
  column: SortColumn,
  descending = false,
): ApplicantRow[] {
  const sorted = [...rows].sort((a, b) => {
    const ka = sortKey(a, column);
    const kb = sortKey(b, column);
    let order = 0;
    if (ka < kb) order = -1;
    else if (ka > kb) order = 1;
    if (order === 0) {
      order = a.applicant_id < b.applicant_id ? -1 : a.applicant_id > b.applicant_id ? 1 : 0;
    }
    return descending ? -order : order;
  });
  return sorted;
}

const COLUMNS: { key: SortColumn; title: string }[] = [
  { key: "applicant_id", title: "Applicant" },
  { key: "letters_count", title: "Letters" },
  { key: "highlight_proportion", title: "Highlight proportion" },
  { key: "teamwork", title: "Teamwork" },
  { key: "communication", title: "Communication" },
  { key: "innovation", title: "Innovation" },
];

export function renderComparisonTable(
  container: HTMLElement,
  rows: ApplicantRow[],
  onSort?: (column: SortColumn) => void,
): void {
  container.textContent = "";
  const table = document.createElement("table");
  table.className = "comparison";

  const head = table.createTHead().insertRow();
  for (const column of COLUMNS) {
    const cell = document.createElement("th");
    cell.textContent = column.title;
    cell.dataset.column = column.key;
    if (onSort) {
      cell.addEventListener("click", () => onSort(column.key));
    }
    head.appendChild(cell);
  }

  const body = table.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    tr.dataset.applicantId = row.applicant_id;
    tr.insertCell().textContent = row.applicant_id;
    tr.insertCell().textContent = String(row.letters_count);
    tr.insertCell().textContent = row.highlight_proportion;
    tr.insertCell().textContent = String(row.micro_label_counts.teamwork);
    tr.insertCell().textContent = String(row.micro_label_counts.communication);
    tr.insertCell().textContent = String(row.micro_label_counts.innovation);
  }
  container.appendChild(table);
}
