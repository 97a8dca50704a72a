import { ApiClient, fetchTransport } from "./api.js";
import { API_BASE } from "./config.js";
import { Dashboard } from "./app.js";

// Browser entry point: ?applicant=<id> selects the applicant to show.

document.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app root element");
  const dashboard = new Dashboard(root, new ApiClient(fetchTransport(API_BASE)));
  const applicant = new URLSearchParams(window.location.search).get("applicant");
  if (applicant) {
    void dashboard.loadApplicant(applicant);
  }
  void dashboard.loadComparison();
});
