// Wire types mirroring the linkflows HTTP API.

export type Role = "reviewer" | "author" | "editor" | "peer" | "modelExpert" | "tool";
export type Aspect = "syntax" | "style" | "content";
export type Polarity = "negative" | "neutral" | "positive";
export type ActionNeeded = "actionNeeded" | "suggestion" | "noActionNeeded";
export type Agreement = "agree" | "partiallyAgree" | "disagree";
export type CheckStatus = "addressed" | "partiallyAddressed" | "notAddressed";

export interface ProblemReport {
  status: number;
  code: string;
  detail: string;
  violations?: { code: string; detail: string }[];
}

export interface SnippetRow {
  id: string;
  level: "article" | "section" | "paragraph";
  text: string;
  parent: string | null;
  order: number;
  commentCount: number;
}

export interface ArticleView {
  article: string;
  snippets: SnippetRow[];
}

export interface ThreadNode {
  id: string;
  kind: "reviewComment" | "responseComment" | "actionCheckComment";
  payload: Record<string, unknown>;
  children: ThreadNode[];
}

export interface ThreadsResponse {
  target: string;
  threads: ThreadNode[];
}

export interface CommentPayload {
  refersTo: string;
  text: string;
  aspect: Aspect;
  polarity: Polarity;
  actionNeeded: ActionNeeded;
  impact: number;
  author: { displayName: string; role: Role } | string;
}
