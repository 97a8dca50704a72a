import type { HighlightSpan } from "./types.js";

// Pure text segmentation: raw_text plus disjoint spans in, ordered render
// regions out. Each span becomes exactly one contiguous highlighted
// region; adjacent spans stay distinct regions (no merging), so copying a
// region's text always yields the exact sentence the server classified.

export interface Region {
  text: string;
  highlighted: boolean;
  spanIndex: number | null;
}

export function segmentText(rawText: string, spans: HighlightSpan[]): Region[] {
  const usable: { span: HighlightSpan; index: number }[] = [];
  spans.forEach((span, index) => {
    if (span.start < 0 || span.end > rawText.length || span.start >= span.end) {
      // a server bug, not a render error: skip and leave a diagnostic
      console.warn(
        `skipping out-of-range highlight span ${span.sentence_id} ` +
          `(${span.start}, ${span.end}) for text of length ${rawText.length}`,
      );
      return;
    }
    usable.push({ span, index });
  });
  usable.sort((a, b) => a.span.start - b.span.start);

  const regions: Region[] = [];
  let cursor = 0;
  for (const { span, index } of usable) {
    if (span.start < cursor) {
      console.warn(`skipping overlapping highlight span ${span.sentence_id}`);
      continue;
    }
    if (span.start > cursor) {
      regions.push({ text: rawText.slice(cursor, span.start), highlighted: false, spanIndex: null });
    }
    regions.push({ text: rawText.slice(span.start, span.end), highlighted: true, spanIndex: index });
    cursor = span.end;
  }
  if (cursor < rawText.length) {
    regions.push({ text: rawText.slice(cursor), highlighted: false, spanIndex: null });
  }
  return regions;
}

export function renderLetterText(container: HTMLElement, rawText: string, spans: HighlightSpan[]): void {
  container.textContent = "";
  for (const region of segmentText(rawText, spans)) {
    if (region.highlighted) {
      const mark = document.createElement("mark");
      mark.className = "highlight";
      mark.dataset.spanIndex = String(region.spanIndex);
      mark.textContent = region.text;
      container.appendChild(mark);
    } else {
      container.appendChild(document.createTextNode(region.text));
    }
  }
}
