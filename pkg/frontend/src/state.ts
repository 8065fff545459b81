import type { ActionNeeded, Aspect, Polarity, Role, ThreadNode } from "./types.js";

export interface DraftComment {
  text: string;
  aspect?: Aspect;
  polarity?: Polarity;
  actionNeeded?: ActionNeeded;
  impact?: number;
}

export interface ViewState {
  currentArticle?: string;
  selectedSnippet?: string;
  draft: DraftComment;
  threads: ThreadNode[];
  role: Role;
}

export function emptyDraft(): DraftComment {
  return { text: "" };
}

export function initialState(): ViewState {
  return { draft: emptyDraft(), threads: [], role: "reviewer" };
}

/**
 * The submit gate: a target must be selected and all four dimensions plus
 * non-empty text must be present, so the client can never produce a request
 * the server would reject for missing dimensions.
 */
export function canSubmit(state: ViewState): boolean {
  const d = state.draft;
  return Boolean(
    state.selectedSnippet &&
      d.text.trim() !== "" &&
      d.aspect !== undefined &&
      d.polarity !== undefined &&
      d.actionNeeded !== undefined &&
      d.impact !== undefined &&
      Number.isInteger(d.impact) &&
      d.impact >= 1 &&
      d.impact <= 5,
  );
}

/** What the gate is still waiting for, for the inline hint. */
export function missingFields(state: ViewState): string[] {
  const d = state.draft;
  const missing: string[] = [];
  if (!state.selectedSnippet) missing.push("snippet");
  if (d.text.trim() === "") missing.push("text");
  if (d.aspect === undefined) missing.push("aspect");
  if (d.polarity === undefined) missing.push("polarity");
  if (d.actionNeeded === undefined) missing.push("action needed");
  if (d.impact === undefined) missing.push("impact");
  return missing;
}

// Role gates: authors reply with agreement, reviewers/editors record checks.
export function canRespond(role: Role): boolean {
  return role === "author";
}

export function canCheck(role: Role): boolean {
  return role === "reviewer" || role === "editor";
}

/** Tooltip copy for the two ends of the impact slider (asymmetric semantics). */
export const IMPACT_HINTS = {
  negative: "for a negative point: the quality gain if the point is fully addressed",
  positive: "for a positive point: the quality loss if the point were not true",
};
