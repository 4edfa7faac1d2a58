// String-based rendering helpers. Views are pure functions from API data
// and view state to HTML, which keeps them reproducible and testable; the
// app shell wires interactivity through data-action attributes.

export function esc(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function attr(value: unknown): string {
  return `"${esc(value)}"`;
}

export interface ArticleLike {
  id: string;
  title: string;
  snippet: string;
  url: string;
  language: string;
  published_at: string;
}

// Articles render title + snippet only: the store never persists more of
// the body and the UI must not pretend otherwise.
export function renderArticleList(articles: ArticleLike[]): string {
  if (articles.length === 0) {
    return `<p class="empty">No articles.</p>`;
  }
  const items = articles
    .map(
      (a) => `<li class="article" data-article-id=${attr(a.id)}>
  <a href=${attr(a.url)} target="_blank" rel="noopener">${esc(a.title)}</a>
  <span class="meta">${esc(a.language)} · ${esc(a.published_at)}</span>
  <p class="snippet">${esc(a.snippet)}${a.snippet ? "…" : ""}</p>
</li>`,
    )
    .join("\n");
  return `<ul class="articles">\n${items}\n</ul>`;
}

export function errorBanner(message: string | null): string {
  if (!message) return "";
  return `<div class="banner error" role="alert">${esc(message)} — showing last loaded data.</div>`;
}
