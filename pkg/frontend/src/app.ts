import { ApiError, LinkflowsApi } from "./api.js";
import {
  IMPACT_HINTS,
  canCheck,
  canRespond,
  canSubmit,
  emptyDraft,
  initialState,
  missingFields,
  type ViewState,
} from "./state.js";
import type {
  ActionNeeded,
  Agreement,
  Aspect,
  CheckStatus,
  Polarity,
  Role,
  ThreadNode,
} from "./types.js";

const ASPECTS: Aspect[] = ["syntax", "style", "content"];
const POLARITIES: Polarity[] = ["negative", "neutral", "positive"];
const ACTIONS: ActionNeeded[] = ["actionNeeded", "suggestion", "noActionNeeded"];
const AGREEMENTS: Agreement[] = ["agree", "partiallyAgree", "disagree"];
const STATUSES: CheckStatus[] = ["addressed", "partiallyAddressed", "notAddressed"];
const ROLES: Role[] = ["reviewer", "author", "editor"];

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export interface App {
  state: ViewState;
  loadArticles(): Promise<string[]>;
  openArticle(iri: string): Promise<void>;
  selectSnippet(iri: string): Promise<void>;
  submitComment(): Promise<string | undefined>;
  respond(target: string, agreement: Agreement, text: string): Promise<string>;
  check(target: string, status: CheckStatus, text: string): Promise<string>;
  setRole(role: Role): void;
  refresh(): Promise<void>;
}

/** Wire the single-page review UI into `root`; all state comes from the API. */
export function createApp(root: HTMLElement, api: LinkflowsApi, userName = "Demo User"): App {
  const doc = root.ownerDocument;
  const state = initialState();

  root.textContent = "";
  const banner = el(doc, "div", { id: "banner", class: "banner", hidden: "" });
  const roleSelect = el(doc, "select", { id: "role-select", title: "acting role" });
  for (const role of ROLES) {
    roleSelect.append(el(doc, "option", { value: role }, role));
  }
  const articleSelect = el(doc, "select", { id: "article-select" });
  const header = el(doc, "header");
  header.append("role: ", roleSelect, " article: ", articleSelect);

  const snippetList = el(doc, "ul", { id: "snippets" });
  const threadPanel = el(doc, "div", { id: "threads" });
  const main = el(doc, "main");
  main.append(snippetList, threadPanel);

  const form = buildForm(doc);
  root.append(banner, header, main, form.element);

  function showBanner(text: string): void {
    banner.textContent = text;
    banner.toggleAttribute("hidden", text === "");
  }

  function author(): { displayName: string; role: Role } {
    return { displayName: userName, role: state.role };
  }

  function buildForm(doc: Document) {
    const element = el(doc, "form", { id: "comment-form" });
    element.addEventListener("submit", (event) => event.preventDefault());

    const radios = (name: string, values: string[]) => {
      const box = el(doc, "fieldset", { id: `${name}-choices` });
      box.append(el(doc, "legend", {}, name));
      for (const value of values) {
        const label = el(doc, "label");
        const input = el(doc, "input", { type: "radio", name, value }) as HTMLInputElement;
        label.append(input, value);
        box.append(label);
      }
      element.append(box);
      return box;
    };

    radios("aspect", ASPECTS);
    radios("polarity", POLARITIES);
    radios("actionNeeded", ACTIONS);

    const impact = el(doc, "input", {
      type: "range", id: "impact", min: "1", max: "5", step: "1",
      title: `impact 1-5; ${IMPACT_HINTS.negative}; ${IMPACT_HINTS.positive}`,
    }) as HTMLInputElement;
    const impactSet = el(doc, "input", { type: "checkbox", id: "impact-set" }) as HTMLInputElement;
    const impactRow = el(doc, "div", { id: "impact-row" });
    impactRow.append(el(doc, "label", { for: "impact-set" }, "impact"), impactSet, impact);
    element.append(impactRow);

    const text = el(doc, "textarea", { id: "comment-text" }) as HTMLTextAreaElement;
    const submit = el(doc, "button", { id: "submit-comment", type: "submit" }, "submit comment") as HTMLButtonElement;
    const hint = el(doc, "span", { id: "form-hint" });
    const errors = el(doc, "div", { id: "form-errors" });
    element.append(text, submit, hint, errors);

    element.addEventListener("change", syncDraft);
    element.addEventListener("input", syncDraft);

    function syncDraft(): void {
      const picked = (name: string) =>
        (element.querySelector(`input[name="${name}"]:checked`) as HTMLInputElement | null)?.value;
      state.draft.aspect = picked("aspect") as Aspect | undefined;
      state.draft.polarity = picked("polarity") as Polarity | undefined;
      state.draft.actionNeeded = picked("actionNeeded") as ActionNeeded | undefined;
      state.draft.impact = impactSet.checked ? Number(impact.value) : undefined;
      state.draft.text = text.value;
      updateGate();
    }

    function updateGate(): void {
      const ok = canSubmit(state);
      submit.disabled = !ok;
      hint.textContent = ok ? "" : `missing: ${missingFields(state).join(", ")}`;
    }

    function reset(): void {
      (element as HTMLFormElement).reset();
      impactSet.checked = false;
      text.value = "";
      state.draft = emptyDraft();
      updateGate();
    }

    function showViolations(violations: { code: string; detail: string }[]): void {
      errors.textContent = "";
      for (const violation of violations) {
        errors.append(el(doc, "p", { class: "violation", "data-code": violation.code }, violation.detail));
      }
    }

    updateGate();
    return { element, updateGate, reset, showViolations, errorBox: errors };
  }

  function chip(doc: Document, kind: string, value: string): HTMLElement {
    return el(doc, "span", { class: `chip chip-${kind}`, "data-chip": kind }, value);
  }

  function renderThread(node: ThreadNode): HTMLElement {
    const item = el(doc, "div", { class: `thread-node kind-${node.kind}`, "data-id": node.id });
    const head = el(doc, "div", { class: "node-head" });
    const p = node.payload as Record<string, string | number>;
    if (node.kind === "reviewComment") {
      head.append(
        chip(doc, "aspect", String(p.aspect)),
        chip(doc, "polarity", String(p.polarity)),
        chip(doc, "action", String(p.actionNeeded)),
        chip(doc, "impact", `impact ${p.impact}`),
      );
    } else if (node.kind === "responseComment") {
      head.append(chip(doc, "agreement", String(p.agreement)));
    } else {
      head.append(chip(doc, "status", String(p.status)));
    }
    const body = el(doc, "p", { class: "node-text" }, String(p.text ?? ""));
    item.append(head, body);

    item.append(replyControls(node));
    const children = el(doc, "div", { class: "children" });
    for (const child of node.children) {
      children.append(renderThread(child));
    }
    item.append(children);
    return item;
  }

  function replyControls(node: ThreadNode): HTMLElement {
    const box = el(doc, "div", { class: "reply-controls" });

    const respondSelect = el(doc, "select", { class: "respond-agreement" }) as HTMLSelectElement;
    for (const a of AGREEMENTS) respondSelect.append(el(doc, "option", { value: a }, a));
    const respondText = el(doc, "input", { type: "text", class: "respond-text", placeholder: "reply" }) as HTMLInputElement;
    const respondButton = el(doc, "button", { type: "button", class: "respond-button" }, "respond") as HTMLButtonElement;
    if (!canRespond(state.role)) {
      respondButton.disabled = true;
      respondButton.title = "only the author can respond to a comment";
    }
    respondButton.addEventListener("click", () => {
      void app.respond(node.id, respondSelect.value as Agreement, respondText.value);
    });

    const checkSelect = el(doc, "select", { class: "check-status" }) as HTMLSelectElement;
    for (const s of STATUSES) checkSelect.append(el(doc, "option", { value: s }, s));
    const checkText = el(doc, "input", { type: "text", class: "check-text", placeholder: "check note" }) as HTMLInputElement;
    const checkButton = el(doc, "button", { type: "button", class: "check-button" }, "record check") as HTMLButtonElement;
    if (!canCheck(state.role)) {
      checkButton.disabled = true;
      checkButton.title = "only reviewers or editors can record whether a point was addressed";
    }
    if (node.kind === "actionCheckComment") {
      checkButton.disabled = true;
      checkButton.title = "checks reply to review comments or responses";
    }
    checkButton.addEventListener("click", () => {
      void app.check(node.id, checkSelect.value as CheckStatus, checkText.value);
    });

    box.append(respondSelect, respondText, respondButton, checkSelect, checkText, checkButton);
    return box;
  }

  async function renderSnippets(): Promise<void> {
    if (!state.currentArticle) return;
    const view = await api.articleView(state.currentArticle);
    snippetList.textContent = "";
    for (const snippet of view.snippets) {
      const row = el(doc, "li", {
        class: `snippet level-${snippet.level}` + (snippet.id === state.selectedSnippet ? " selected" : ""),
        "data-id": snippet.id,
      });
      const label = snippet.level === "article" ? "(whole article)" : snippet.text;
      row.append(el(doc, "span", { class: "snippet-text" }, label));
      row.append(el(doc, "span", { class: "badge", "data-count": String(snippet.commentCount) },
                    String(snippet.commentCount)));
      row.addEventListener("click", () => void app.selectSnippet(snippet.id));
      snippetList.append(row);
    }
  }

  async function renderThreads(): Promise<void> {
    threadPanel.textContent = "";
    if (!state.selectedSnippet) {
      threadPanel.append(el(doc, "p", { class: "placeholder" }, "select a snippet to see its threads"));
      return;
    }
    const body = await api.threads(state.selectedSnippet);
    state.threads = body.threads;
    if (body.threads.length === 0) {
      threadPanel.append(el(doc, "p", { class: "placeholder" }, "no comments on this snippet yet"));
    }
    for (const thread of body.threads) {
      threadPanel.append(renderThread(thread));
    }
  }

  roleSelect.addEventListener("change", () => app.setRole(roleSelect.value as Role));
  articleSelect.addEventListener("change", () => void app.openArticle(articleSelect.value));

  const app: App = {
    state,

    async loadArticles() {
      const articles = await api.listArticles();
      articleSelect.textContent = "";
      for (const iri of articles) {
        articleSelect.append(el(doc, "option", { value: iri }, iri));
      }
      return articles;
    },

    async openArticle(iri: string) {
      if (!iri) {
        showBanner("no article selected");
        return;
      }
      state.currentArticle = iri;
      state.selectedSnippet = undefined;
      try {
        await renderSnippets();
        await renderThreads();
        showBanner("");
      } catch (error) {
        showBanner(error instanceof ApiError ? error.message : "API unreachable");
        throw error;
      }
    },

    async selectSnippet(iri: string) {
      state.selectedSnippet = iri;
      form.updateGate();
      await renderSnippets();
      await renderThreads();
    },

    async submitComment() {
      if (!canSubmit(state) || !state.selectedSnippet) {
        form.updateGate();
        return undefined;
      }
      const d = state.draft;
      try {
        const id = await api.postComment({
          refersTo: state.selectedSnippet,
          text: d.text,
          aspect: d.aspect!,
          polarity: d.polarity!,
          actionNeeded: d.actionNeeded!,
          impact: d.impact!,
          author: author(),
        });
        form.reset();
        form.showViolations([]);
        await app.refresh();
        return id;
      } catch (error) {
        if (error instanceof ApiError) {
          // draft is preserved; violations appear next to the form
          form.showViolations(error.report.violations ?? [{ code: error.report.code, detail: error.report.detail }]);
          return undefined;
        }
        throw error;
      }
    },

    async respond(target, agreement, text) {
      const id = await api.postResponse(target, text, agreement, author());
      await app.refresh();
      return id;
    },

    async check(target, status, text) {
      const id = await api.postCheck(target, text, status, author());
      await app.refresh();
      return id;
    },

    setRole(role) {
      state.role = role;
      roleSelect.value = role;
      void renderThreads();
    },

    async refresh() {
      await renderSnippets();
      await renderThreads();
    },
  };

  return app;
}

/** Browser bootstrap; tests drive createApp directly instead. */
export async function boot(doc: Document): Promise<App> {
  const api = new LinkflowsApi("");
  await api.init();
  const app = createApp(doc.getElementById("app") as HTMLElement, api);
  const articles = await app.loadArticles();
  if (articles.length > 0) {
    await app.openArticle(articles[0]!);
  }
  return app;
}
