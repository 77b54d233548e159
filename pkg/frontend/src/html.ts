/** Shared HTML helpers for the server-rendered screens. */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const STYLE = `
body { font-family: system-ui, sans-serif; margin: 2rem auto; max-width: 72rem; padding: 0 1rem; color: #1a1a2e; }
h1 { font-size: 1.5rem; } h2 { font-size: 1.2rem; margin-top: 2rem; }
table { border-collapse: collapse; margin: 0.75rem 0; }
th, td { border: 1px solid #cbd5e1; padding: 0.3rem 0.7rem; text-align: right; }
th:first-child, td:first-child { text-align: left; }
.badge { display: inline-block; border-radius: 0.5rem; padding: 0.1rem 0.6rem; margin-right: 0.4rem; font-size: 0.85rem; }
.badge.ok { background: #dcfce7; color: #14532d; }
.badge.fail { background: #fee2e2; color: #7f1d1d; }
.badge.info { background: #e0e7ff; color: #312e81; }
.error { background: #fee2e2; border: 1px solid #fca5a5; padding: 0.6rem 1rem; border-radius: 0.5rem; }
.note { background: #fef9c3; border: 1px solid #fde047; padding: 0.5rem 1rem; border-radius: 0.5rem; }
.stars label { margin-right: 0.5rem; white-space: nowrap; }
form.inline { display: inline; }
input[type=text], input[type=number] { width: 8rem; }
button { padding: 0.3rem 0.9rem; }
.columns { display: flex; gap: 2rem; flex-wrap: wrap; }
.columns > div { flex: 1 1 24rem; }
#meter.exact { color: #14532d; font-weight: 600; }
#meter.off { color: #7f1d1d; }
code { background: #f1f5f9; padding: 0 0.3rem; }
svg .frontier { fill: none; stroke: #312e81; stroke-width: 2; }
svg .marker { fill: #dc2626; }
svg .marker2 { fill: #0e7490; }
`;

export function page(title: string, body: string): string {
  return `<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>${escapeHtml(title)}</title>
<style>${STYLE}</style>
</head>
<body>
${body}
</body>
</html>`;
}

export function table(headers: string[], rows: string[][]): string {
  const head = headers.map((h) => `<th>${escapeHtml(h)}</th>`).join("");
  const body = rows
    .map((row) => `<tr>${row.map((c) => `<td>${c}</td>`).join("")}</tr>`)
    .join("\n");
  return `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function badge(label: string, ok: boolean): string {
  return `<span class="badge ${ok ? "ok" : "fail"}">${escapeHtml(label)}: ${ok ? "pass" : "FAIL"}</span>`;
}

export function infoBadge(label: string): string {
  return `<span class="badge info">${escapeHtml(label)}</span>`;
}

export function shareCell(value: number): string {
  return value.toFixed(4);
}
