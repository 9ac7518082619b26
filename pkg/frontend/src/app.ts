/** Debounced typeahead wired to the completion service.
 *
 * Keystrokes are debounced (default 80 ms); every request carries a
 * monotonically increasing id and a response only reaches the DOM if no
 * newer request has been issued since, so out-of-order replies can never
 * overwrite fresher suggestions.  Render order always equals server order.
 */

import { CompleteResponse, CompletionJson, Fetcher, httpFetcher } from "./api";

export interface AppOptions {
  baseUrl?: string;
  debounceMs?: number;
  fetcher?: Fetcher;
  structures?: string[];
  defaultK?: number;
}

const K_CHOICES = [1, 5, 10, 20];

export class TypeaheadApp {
  readonly input: HTMLInputElement;
  readonly kSelect: HTMLSelectElement;
  readonly structureSelect: HTMLSelectElement;
  readonly list: HTMLUListElement;
  readonly latency: HTMLElement;
  readonly banner: HTMLElement;
  readonly empty: HTMLElement;

  /** Number of responses that actually reached the DOM; used by tests. */
  renderCount = 0;

  private readonly fetcher: Fetcher;
  private readonly debounceMs: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private latestRequest = 0;
  private activeIndex = -1;

  constructor(root: HTMLElement, options: AppOptions = {}) {
    this.fetcher = options.fetcher ?? httpFetcher(options.baseUrl ?? "");
    this.debounceMs = options.debounceMs ?? 80;

    root.innerHTML = "";
    this.banner = el("div", "banner");
    this.banner.hidden = true;

    this.input = el("input", "search") as HTMLInputElement;
    this.input.type = "text";
    this.input.placeholder = "start typing";

    this.kSelect = el("select", "k-select") as HTMLSelectElement;
    for (const k of K_CHOICES) {
      const opt = document.createElement("option");
      opt.value = String(k);
      opt.textContent = `top ${k}`;
      this.kSelect.appendChild(opt);
    }
    this.kSelect.value = String(options.defaultK ?? 10);

    this.structureSelect = el("select", "structure-select") as HTMLSelectElement;
    for (const name of options.structures ?? ["default"]) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = name;
      this.structureSelect.appendChild(opt);
    }

    this.list = el("ul", "suggestions") as HTMLUListElement;
    this.empty = el("div", "empty-state");
    this.empty.textContent = "no completions";
    this.empty.hidden = true;
    this.latency = el("div", "latency");

    const controls = el("div", "controls");
    controls.append(this.input, this.kSelect, this.structureSelect);
    root.append(this.banner, controls, this.list, this.empty, this.latency);

    this.input.addEventListener("input", () => this.schedule());
    this.input.addEventListener("keydown", (ev) => this.onKeydown(ev));
    this.kSelect.addEventListener("change", () => this.schedule());
    this.structureSelect.addEventListener("change", () => this.schedule());
  }

  /** Debounce: only the trailing edge of a keystroke burst sends a request. */
  private schedule(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.send();
    }, this.debounceMs);
  }

  private async send(): Promise<void> {
    const id = ++this.latestRequest;
    const q = this.input.value;
    const k = Number(this.kSelect.value);
    const structure = this.structureSelect.value;
    const started = performance.now();
    let response: CompleteResponse;
    try {
      response = await this.fetcher(q, k, structure === "default" ? undefined : structure);
    } catch (err) {
      if (id === this.latestRequest) this.showError(String(err));
      return;
    }
    if (id !== this.latestRequest) return; // stale: a newer keystroke won
    this.render(response, performance.now() - started);
  }

  private render(response: CompleteResponse, roundTripMs: number): void {
    this.renderCount += 1;
    this.banner.hidden = true;
    this.list.innerHTML = "";
    this.activeIndex = -1;
    for (const completion of response.completions) {
      this.list.appendChild(this.renderSuggestion(completion, response.query));
    }
    this.empty.hidden = response.completions.length > 0;
    this.latency.textContent =
      `${response.structure}: ${Math.round(response.elapsed_us)} us server, ` +
      `${roundTripMs.toFixed(1)} ms round trip`;
  }

  private renderSuggestion(completion: CompletionJson, query: string): HTMLLIElement {
    const item = document.createElement("li");
    item.className = "suggestion";

    const text = el("span", "text");
    if (query && completion.text.startsWith(query)) {
      const match = el("strong", "matched-prefix");
      match.textContent = query;
      text.append(match, completion.text.slice(query.length));
    } else {
      text.textContent = completion.text;
    }

    const score = el("span", "score");
    score.textContent = String(completion.score);
    item.append(text, score);

    for (const rw of completion.rewrites) {
      const badge = el("span", "badge");
      badge.textContent = `${rw.lhs}→${rw.rhs}`;
      badge.title = `rewrote [${rw.start}, ${rw.end}) of the query`;
      item.appendChild(badge);
    }
    return item;
  }

  private onKeydown(ev: KeyboardEvent): void {
    const items = Array.from(this.list.children) as HTMLElement[];
    if (items.length === 0) return;
    if (ev.key === "ArrowDown" || ev.key === "ArrowUp") {
      ev.preventDefault();
      const step = ev.key === "ArrowDown" ? 1 : -1;
      this.activeIndex = (this.activeIndex + step + items.length) % items.length;
      items.forEach((item, i) => item.classList.toggle("active", i === this.activeIndex));
    } else if (ev.key === "Enter" && this.activeIndex >= 0) {
      ev.preventDefault();
      const text = items[this.activeIndex].querySelector(".text")?.textContent ?? "";
      this.input.value = text;
      this.schedule();
    }
  }

  private showError(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

export function createApp(root: HTMLElement, options: AppOptions = {}): TypeaheadApp {
  return new TypeaheadApp(root, options);
}
