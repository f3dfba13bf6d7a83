import type { AppState } from "./state";
import type { EditPlan } from "./types";

/** Chronological list of committed edit plans; clicking one re-ghosts its
 * before/after boxes in the viewer. */
export class HistoryPanel {
  private list: HTMLOListElement;

  constructor(root: HTMLElement, private onSelect: (plan: EditPlan) => void) {
    root.innerHTML = `<div class="history"><h3>History</h3>
      <ol class="history-list" data-role="history"></ol></div>`;
    this.list = root.querySelector("[data-role=history]")!;
  }

  update(state: AppState): void {
    this.list.innerHTML = "";
    for (const plan of state.history) {
      const item = document.createElement("li");
      const objects = plan.entries.map((e) => e.object).join(", ");
      item.textContent =
        `${plan.version !== undefined ? `v${plan.version} · ` : ""}` +
        `${plan.query.original} → ${objects}`;
      item.className = plan === state.lastPlan ? "selected" : "";
      item.addEventListener("click", () => this.onSelect(plan));
      this.list.appendChild(item);
    }
  }
}
