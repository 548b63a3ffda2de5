// Entity table: server-driven sorting and filtering, page controls, and an
// embedding-columns toggle.

import { EntityRow } from "./api.js";
import { TableState } from "./state.js";

export interface TableHandlers {
  onSort: (column: string) => void;
  onFilter: (text: string) => void;
  onPage: (delta: number) => void;
  onToggleEmbedding: (show: boolean) => void;
}

export class TableView {
  private readonly search: HTMLInputElement;
  private readonly embeddingToggle: HTMLInputElement;
  private readonly status: HTMLSpanElement;
  private readonly table: HTMLTableElement;
  private readonly previous: HTMLButtonElement;
  private readonly next: HTMLButtonElement;

  constructor(
    private readonly container: HTMLElement,
    private readonly handlers: TableHandlers,
  ) {
    const controls = document.createElement("div");
    controls.className = "table-controls";

    this.search = document.createElement("input");
    this.search.type = "search";
    this.search.placeholder = "filter rows";
    this.search.addEventListener("input", () => handlers.onFilter(this.search.value));

    const toggleLabel = document.createElement("label");
    this.embeddingToggle = document.createElement("input");
    this.embeddingToggle.type = "checkbox";
    this.embeddingToggle.addEventListener("change", () =>
      handlers.onToggleEmbedding(this.embeddingToggle.checked),
    );
    toggleLabel.append(this.embeddingToggle, document.createTextNode(" embedding columns"));

    this.previous = document.createElement("button");
    this.previous.textContent = "prev";
    this.previous.addEventListener("click", () => handlers.onPage(-1));
    this.next = document.createElement("button");
    this.next.textContent = "next";
    this.next.addEventListener("click", () => handlers.onPage(1));
    this.status = document.createElement("span");
    this.status.className = "table-status";

    controls.append(this.search, toggleLabel, this.previous, this.next, this.status);

    this.table = document.createElement("table");
    this.table.className = "entity-table";
    container.append(controls, this.table);
  }

  render(columns: string[], rows: EntityRow[], total: number, state: TableState): void {
    if (this.search.value !== state.filter) this.search.value = state.filter;
    this.embeddingToggle.checked = state.showEmbedding;

    const pages = Math.max(1, Math.ceil(total / state.pageSize));
    this.previous.disabled = state.page <= 0;
    this.next.disabled = state.page >= pages - 1;
    this.status.textContent = `${total} rows, page ${Math.min(state.page + 1, pages)}/${pages}`;

    this.table.replaceChildren();
    const head = this.table.createTHead().insertRow();
    for (const column of columns) {
      const cell = document.createElement("th");
      cell.dataset.column = column;
      let marker = "";
      if (column === state.sortBy) marker = state.order === "asc" ? " ▲" : " ▼";
      cell.textContent = column + marker;
      cell.addEventListener("click", () => this.handlers.onSort(column));
      head.appendChild(cell);
    }
    const body = this.table.createTBody();
    for (const row of rows) {
      const tr = body.insertRow();
      tr.dataset.entityId = row.entity_id;
      for (const column of columns) {
        const value = row[column];
        tr.insertCell().textContent = value === undefined ? "" : String(value);
      }
    }
  }

  clear(message: string): void {
    this.table.replaceChildren();
    this.status.textContent = message;
    this.previous.disabled = true;
    this.next.disabled = true;
  }
}
