// API base URL, settable at build time (globalThis.__API_BASE__ injected
// by the hosting page) with a same-origin default.

declare global {
  // eslint-disable-next-line no-var
  var __API_BASE__: string | undefined;
}

export const API_BASE: string = globalThis.__API_BASE__ ?? "";
