import type {
  Agreement,
  ArticleView,
  CheckStatus,
  CommentPayload,
  ProblemReport,
  Role,
  ThreadsResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public report: ProblemReport) {
    super(`${report.code}: ${report.detail}`);
  }
}

async function unwrap<T>(res: Response): Promise<T> {
  const body = await res.json();
  if (!res.ok) {
    throw new ApiError(body as ProblemReport);
  }
  return body as T;
}

/** Thin fetch client; node refs are sent relative to the store namespace. */
export class LinkflowsApi {
  private namespace = "";

  constructor(private base = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  /** Must be called once: learns the store's base namespace for ref building. */
  async init(): Promise<void> {
    const info = await unwrap<{ manifest: { baseNamespace: string } }>(
      await fetch(this.url("/api/store")),
    );
    this.namespace = info.manifest.baseNamespace;
  }

  ref(iri: string): string {
    return iri.startsWith(this.namespace) ? iri.slice(this.namespace.length) : iri;
  }

  async listArticles(): Promise<string[]> {
    const body = await unwrap<{ articles: { id: string }[] }>(
      await fetch(this.url("/api/articles")),
    );
    return body.articles.map((a) => a.id);
  }

  async articleView(articleIri: string): Promise<ArticleView> {
    return unwrap(await fetch(this.url(`/api/articles/${this.ref(articleIri)}`)));
  }

  async threads(nodeIri: string): Promise<ThreadsResponse> {
    return unwrap(await fetch(this.url(`/api/threads/${this.ref(nodeIri)}`)));
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const res = await fetch(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return unwrap(res);
  }

  async postComment(payload: CommentPayload): Promise<string> {
    const body = await this.post<{ id: string }>("/api/comments", payload);
    return body.id;
  }

  async postResponse(target: string, text: string, agreement: Agreement, author: { displayName: string; role: Role }): Promise<string> {
    const body = await this.post<{ id: string }>("/api/responses", {
      isResponseTo: target,
      text,
      agreement,
      author,
    });
    return body.id;
  }

  async postCheck(target: string, text: string, status: CheckStatus, author: { displayName: string; role: Role }): Promise<string> {
    const body = await this.post<{ id: string }>("/api/checks", {
      isResponseTo: target,
      text,
      status,
      author,
    });
    return body.id;
  }
}
