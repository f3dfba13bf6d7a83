import { completeQuery, suggestionsFor } from "./autocomplete";
import type { AppState } from "./state";
import { STAGES, type StrategyKind } from "./types";

export interface ConsoleCallbacks {
  onSubmit(query: string, strategy: StrategyKind): void;
  onUndo(): void;
}

const fmt = (v: number) => Number(v.toFixed(6)).toString();
const triple = (v: readonly number[]) => `(${v.map(fmt).join(", ")})`;

/** Edit console: query input with quoted-name autocomplete, strategy picker,
 * pipeline stage ticker, per-object transform readout, error banner, undo. */
export class EditConsole {
  readonly input: HTMLInputElement;
  readonly strategySelect: HTMLSelectElement;
  readonly submitButton: HTMLButtonElement;
  readonly undoButton: HTMLButtonElement;
  private suggestions: HTMLUListElement;
  private stagesList: HTMLOListElement;
  private result: HTMLDivElement;
  private errorBox: HTMLDivElement;
  private status: HTMLDivElement;
  private names: readonly string[] = [];

  constructor(root: HTMLElement, private callbacks: ConsoleCallbacks) {
    root.innerHTML = `
      <div class="console">
        <div class="console-row">
          <select class="strategy" title="prompting strategy">
            <option value="cga" selected>CGA</option>
            <option value="euclidean">Euclidean</option>
            <option value="omniverse">Omniverse</option>
          </select>
          <span class="status" data-role="status"></span>
        </div>
        <div class="console-row query-row">
          <input type="text" class="query" data-role="query"
                 placeholder="move the 'sofa' to the right" autocomplete="off" />
          <button class="submit" data-role="submit">Edit</button>
          <button class="undo" data-role="undo">Undo</button>
        </div>
        <ul class="suggestions" data-role="suggestions" hidden></ul>
        <ol class="stages" data-role="stages"></ol>
        <div class="error" data-role="error" hidden></div>
        <div class="result" data-role="result"></div>
      </div>`;
    this.input = root.querySelector("[data-role=query]")!;
    this.strategySelect = root.querySelector(".strategy")!;
    this.submitButton = root.querySelector("[data-role=submit]")!;
    this.undoButton = root.querySelector("[data-role=undo]")!;
    this.suggestions = root.querySelector("[data-role=suggestions]")!;
    this.stagesList = root.querySelector("[data-role=stages]")!;
    this.result = root.querySelector("[data-role=result]")!;
    this.errorBox = root.querySelector("[data-role=error]")!;
    this.status = root.querySelector("[data-role=status]")!;

    this.submitButton.addEventListener("click", () => this.submit());
    this.undoButton.addEventListener("click", () => this.callbacks.onUndo());
    this.input.addEventListener("keydown", (event) => {
      if (event.key === "Enter") this.submit();
    });
    this.input.addEventListener("input", () => this.refreshSuggestions());
  }

  private submit(): void {
    const query = this.input.value.trim();
    if (!query) return;
    this.callbacks.onSubmit(query,
      this.strategySelect.value as StrategyKind);
  }

  setObjectNames(names: readonly string[]): void {
    this.names = names;
    this.refreshSuggestions();
  }

  refreshSuggestions(): void {
    const caret = this.input.selectionStart ?? this.input.value.length;
    const matches = suggestionsFor(this.input.value, caret, this.names);
    this.suggestions.innerHTML = "";
    this.suggestions.hidden = matches.length === 0;
    for (const name of matches) {
      const item = document.createElement("li");
      item.textContent = name;
      item.addEventListener("mousedown", (event) => {
        event.preventDefault();
        this.acceptSuggestion(name);
      });
      this.suggestions.appendChild(item);
    }
  }

  acceptSuggestion(name: string): void {
    const caret = this.input.selectionStart ?? this.input.value.length;
    const next = completeQuery(this.input.value, caret, name);
    this.input.value = next.value;
    this.input.setSelectionRange(next.caret, next.caret);
    this.suggestions.hidden = true;
    this.input.focus();
  }

  update(state: AppState): void {
    this.status.textContent = state.connected
      ? `v${state.version}${state.busy ? " · working…" : ""}`
      : "disconnected — reconnecting";
    this.submitButton.disabled = state.busy;
    this.stagesList.innerHTML = "";
    for (const stage of STAGES) {
      const item = document.createElement("li");
      item.textContent = stage;
      item.className = state.stages.includes(stage) ? "done" : "pending";
      this.stagesList.appendChild(item);
    }
    this.errorBox.hidden = state.error === null;
    this.errorBox.textContent = state.error
      ? `${state.error.code}: ${state.error.message}` : "";
    if (state.error) this.errorBox.dataset.code = state.error.code;

    this.result.innerHTML = "";
    const plan = state.lastPlan;
    if (!plan) return;
    const header = document.createElement("div");
    header.className = "plan-header";
    header.textContent = `${plan.strategy} · ${plan.query.template} · ` +
      `${(plan.latency * 1000).toFixed(0)} ms · retries ${plan.retries}` +
      (plan.resolver_engaged ? " · collision repaired" : "");
    this.result.appendChild(header);
    for (const entry of plan.entries) {
      const card = document.createElement("div");
      card.className = "entry";
      const title = document.createElement("div");
      title.className = "entry-title";
      title.textContent = `${entry.object} (${entry.variable})`;
      card.appendChild(title);
      if (entry.cga_expression) {
        const expr = document.createElement("code");
        expr.className = "expression";
        expr.textContent = entry.cga_expression;
        card.appendChild(expr);
      }
      const d = entry.decomposition;
      const decomp = document.createElement("div");
      decomp.className = "decomposition";
      decomp.textContent =
        `t = ${triple(d.translation)}  q = ${triple(d.rotation)}  s = ${fmt(d.scale)}`;
      card.appendChild(decomp);
      if (entry.resolver_shift) {
        const shift = document.createElement("div");
        shift.className = "resolver-shift";
        shift.textContent = `collision repair shifted by ${triple(entry.resolver_shift)}`;
        card.appendChild(shift);
      }
      this.result.appendChild(card);
    }
  }
}
