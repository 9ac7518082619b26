/** JSON contract of the completion service. */

export interface RewriteJson {
  rule_id: number;
  lhs: string;
  rhs: string;
  start: number;
  end: number;
}

export interface CompletionJson {
  text: string;
  score: number;
  rewrites: RewriteJson[];
}

export interface CompleteResponse {
  query: string;
  k: number;
  structure: string;
  elapsed_us: number;
  completions: CompletionJson[];
}

export interface StatsResponse {
  default: string;
  structures: Record<string, { kind: string; bytes_total: number; string_count: number }>;
}

export type Fetcher = (q: string, k: number, structure?: string) => Promise<CompleteResponse>;

/** Fetcher hitting a live service; tests inject a mock instead. */
export function httpFetcher(baseUrl: string): Fetcher {
  return async (q, k, structure) => {
    const params = new URLSearchParams({ q, k: String(k) });
    if (structure) params.set("structure", structure);
    const resp = await fetch(`${baseUrl}/api/complete?${params}`);
    if (!resp.ok) {
      let message = `HTTP ${resp.status}`;
      try {
        const body = await resp.json();
        if (body && body.message) message = body.message;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new Error(message);
    }
    return (await resp.json()) as CompleteResponse;
  };
}

export async function fetchStats(baseUrl: string): Promise<StatsResponse> {
  const resp = await fetch(`${baseUrl}/api/stats`);
  if (!resp.ok) throw new Error(`HTTP ${resp.status}`);
  return (await resp.json()) as StatsResponse;
}
