/** Quoted-name autocomplete for the edit console.
 *
 * Suggestions appear while the caret sits inside an unclosed quote;
 * completion inserts the object's name exactly as stored, quote-wrapped, so
 * the service-side templating always matches.
 */

interface QuoteContext {
  start: number; // index of the opening quote character
  char: string;
  partial: string;
}

function openQuote(value: string, caret: number): QuoteContext | null {
  let context: QuoteContext | null = null;
  for (let i = 0; i < caret; i++) {
    const ch = value[i];
    if (context === null && (ch === "'" || ch === '"')) {
      context = { start: i, char: ch, partial: "" };
    } else if (context !== null && ch === context.char) {
      context = null;
    }
  }
  if (context !== null) {
    context.partial = value.slice(context.start + 1, caret);
  }
  return context;
}

export function quoteName(name: string): string {
  const q = name.includes("'") ? '"' : "'";
  return `${q}${name}${q}`;
}

export function suggestionsFor(value: string, caret: number,
                               names: readonly string[], limit = 8): string[] {
  const context = openQuote(value, caret);
  if (context === null) return [];
  const needle = context.partial.toLowerCase();
  return names
    .filter((n) => n.toLowerCase().includes(needle))
    .sort()
    .slice(0, limit);
}

export function completeQuery(value: string, caret: number,
                              name: string): { value: string; caret: number } {
  const quoted = quoteName(name);
  const context = openQuote(value, caret);
  if (context === null) {
    const next = value.slice(0, caret) + quoted + value.slice(caret);
    return { value: next, caret: caret + quoted.length };
  }
  const next = value.slice(0, context.start) + quoted + value.slice(caret);
  return { value: next, caret: context.start + quoted.length };
}
