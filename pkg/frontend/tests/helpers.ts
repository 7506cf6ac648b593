/** Fetch stub: routes (method + path) to canned JSON responses. */

export interface StubRoute {
  status?: number;
  body: unknown;
}

export type RouteTable = Record<string, StubRoute | ((payload: any) => StubRoute)>;

export interface RecordedCall {
  key: string;
  payload: unknown;
}

export function stubFetch(routes: RouteTable): RecordedCall[] {
  const calls: RecordedCall[] = [];
  globalThis.fetch = (async (input: any, init?: any) => {
    const url = typeof input === "string" ? input : input.url;
    const method = init?.method ?? "GET";
    const key = `${method} ${url}`;
    const route = routes[key];
    if (!route) {
      throw new Error(`no stub for ${key}`);
    }
    const payload = init?.body ? JSON.parse(init.body) : undefined;
    calls.push({ key, payload });
    const resolved = typeof route === "function" ? route(payload) : route;
    return {
      ok: (resolved.status ?? 200) < 400,
      status: resolved.status ?? 200,
      json: async () => resolved.body,
    } as Response;
  }) as typeof fetch;
  return calls;
}

export function textOf(element: Element | null): string {
  return element?.textContent ?? "";
}
