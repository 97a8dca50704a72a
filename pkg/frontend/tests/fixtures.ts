import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

import type { ApplicantRow, LetterView, ReportView } from "../src/types.js";

// Recorded service responses (byte-for-byte GET bodies); the entire test
// suite runs with the backend absent.

const FIXTURE_DIR = join(__dirname, "..", "fixtures");

function read(name: string): string {
  return readFileSync(join(FIXTURE_DIR, name), "utf-8");
}

export const reportBody = read("report.json");
export const applicantsBody = read("applicants.json");
export const report: ReportView = JSON.parse(reportBody);
export const applicants: ApplicantRow[] = JSON.parse(applicantsBody);

export const letterBodies: Record<string, string> = {};
export const letters: Record<string, LetterView> = {};
for (const file of readdirSync(FIXTURE_DIR)) {
  if (file.startsWith("letter_")) {
    const body = read(file);
    const parsed = JSON.parse(body) as LetterView;
    letterBodies[parsed.letter_id] = body;
    letters[parsed.letter_id] = parsed;
  }
}

export function transportTable(): Record<string, string> {
  const table: Record<string, string> = {
    [`/applicants/${report.applicant_id}/report`]: reportBody,
    "/applicants": applicantsBody,
  };
  for (const [letterId, body] of Object.entries(letterBodies)) {
    table[`/letters/${letterId}`] = body;
  }
  return table;
}
