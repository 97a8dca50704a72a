import { ApiClient } from "./api.js";
import { renderBarChart } from "./chart.js";
import { renderComparisonTable, SortColumn, sortRows } from "./compare.js";
import { renderLetterText } from "./highlight.js";
import type { ApplicantRow, LetterView, ReportView } from "./types.js";

// Single-page reviewer dashboard. The report (and every letter body) is
// fetched once per applicant selection; the letter dropdown then swaps
// content purely client-side. Every number shown is an API string
// rendered verbatim.

export class Dashboard {
  private report: ReportView | null = null;
  private letters = new Map<string, LetterView>();
  private comparison: ApplicantRow[] = [];
  private sortedBy: SortColumn = "applicant_id";
  private sortDescending = false;

  readonly banner: HTMLElement;
  readonly dropdown: HTMLSelectElement;
  readonly proportionBadge: HTMLElement;
  readonly letterViewer: HTMLElement;
  readonly chart: HTMLElement;
  readonly summaryCard: HTMLElement;
  readonly comparisonContainer: HTMLElement;
  readonly title: HTMLElement;

  constructor(private root: HTMLElement, private client: ApiClient) {
    root.textContent = "";
    this.banner = this.section("banner");
    this.banner.hidden = true;
    this.title = this.section("applicant-title");
    const controls = this.section("controls");
    this.dropdown = document.createElement("select");
    this.dropdown.className = "letter-dropdown";
    this.dropdown.addEventListener("change", () => this.selectLetter(this.dropdown.value));
    controls.appendChild(this.dropdown);
    this.proportionBadge = document.createElement("span");
    this.proportionBadge.className = "proportion-badge";
    controls.appendChild(this.proportionBadge);
    this.letterViewer = this.section("letter-viewer");
    this.chart = this.section("micro-label-chart");
    this.summaryCard = this.section("summary-card");
    this.comparisonContainer = this.section("comparison-container");
  }

  private section(className: string): HTMLElement {
    const el = document.createElement("div");
    el.className = className;
    this.root.appendChild(el);
    return el;
  }

  private showError(message: string, retry: () => void): void {
    this.banner.hidden = false;
    this.banner.textContent = "";
    const text = document.createElement("span");
    text.textContent = message;
    const button = document.createElement("button");
    button.className = "retry";
    button.textContent = "Retry";
    button.addEventListener("click", () => {
      this.banner.hidden = true;
      retry();
    });
    this.banner.append(text, button);
  }

  async loadApplicant(applicantId: string): Promise<void> {
    try {
      const report = await this.client.getReport(applicantId);
      const letters = new Map<string, LetterView>();
      for (const letter of report.letters) {
        letters.set(letter.letter_id, await this.client.getLetter(letter.letter_id));
      }
      this.report = report;
      this.letters = letters;
    } catch (err) {
      this.showError(`Could not load applicant ${applicantId}: ${String(err)}`, () => {
        void this.loadApplicant(applicantId);
      });
      return;
    }
    this.renderReport();
  }

  private renderReport(): void {
    const report = this.report;
    if (!report) return;
    this.title.textContent = `Applicant ${report.applicant_id}`;

    this.dropdown.textContent = "";
    for (const letter of report.letters) {
      const option = document.createElement("option");
      option.value = letter.letter_id;
      option.textContent = `${letter.letter_id} (${letter.writer_role})`;
      this.dropdown.appendChild(option);
    }

    renderBarChart(this.chart, report.micro_label_counts);

    this.summaryCard.textContent = "";
    const heading = document.createElement("h3");
    heading.textContent = "Summary";
    const paragraph = document.createElement("p");
    paragraph.className = "summary-text";
    paragraph.textContent = report.summary;
    this.summaryCard.append(heading, paragraph);
    if (report.summary_degraded) {
      const note = document.createElement("p");
      note.className = "summary-degraded";
      note.textContent = "Summary unavailable from the language model; fallback shown.";
      this.summaryCard.appendChild(note);
    }

    if (report.letters.length > 0) {
      this.selectLetter(report.letters[0].letter_id);
    }
  }

  selectLetter(letterId: string): void {
    const report = this.report;
    const letter = this.letters.get(letterId);
    if (!report || !letter) return;
    this.dropdown.value = letterId;
    const meta = report.letters.find((l) => l.letter_id === letterId);
    this.proportionBadge.textContent = meta ? meta.proportion : "";
    renderLetterText(this.letterViewer, letter.raw_text, letter.highlights);
  }

  async loadComparison(): Promise<void> {
    try {
      this.comparison = await this.client.getApplicants();
    } catch (err) {
      this.showError(`Could not load applicant list: ${String(err)}`, () => {
        void this.loadComparison();
      });
      return;
    }
    this.renderComparison();
  }

  sortComparison(column: SortColumn): void {
    if (this.sortedBy === column) {
      this.sortDescending = !this.sortDescending;
    } else {
      this.sortedBy = column;
      this.sortDescending = false;
    }
    this.renderComparison();
  }

  private renderComparison(): void {
    const rows = sortRows(this.comparison, this.sortedBy, this.sortDescending);
    renderComparisonTable(this.comparisonContainer, rows, (column) =>
      this.sortComparison(column),
    );
  }
}
