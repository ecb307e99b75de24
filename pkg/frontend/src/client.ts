// Thin HTTP client over the explanation service, with a reconnecting
// server-sent-events reader that resumes from the last seen tick.

import type {
  ExplainResponse,
  FeedItem,
  MissionCreated,
  MissionState,
  VocabularyPayload,
  WhatifRequest,
  WhatifResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(`service responded ${status}: ${detail}`);
  }
}

async function expectJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ServiceError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async vocabulary(): Promise<VocabularyPayload> {
    return expectJson(await this.fetchImpl(this.url("/vocabulary")));
  }

  async createMission(body: Record<string, unknown>): Promise<MissionCreated> {
    return expectJson(
      await this.fetchImpl(this.url("/missions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  async knowledge(missionId: string, sinceTick = 0): Promise<FeedItem[]> {
    return expectJson(
      await this.fetchImpl(
        this.url(`/missions/${missionId}/knowledge?since_tick=${sinceTick}`),
      ),
    );
  }

  async missionState(missionId: string): Promise<MissionState> {
    return expectJson(await this.fetchImpl(this.url(`/missions/${missionId}/state`)));
  }

  async explain(body: Record<string, unknown>): Promise<ExplainResponse> {
    return expectJson(
      await this.fetchImpl(this.url("/explain"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  async whatif(body: WhatifRequest): Promise<WhatifResponse> {
    return expectJson(
      await this.fetchImpl(this.url("/whatif"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  streamUrl(missionId: string, sinceTick = 0): string {
    return this.url(`/missions/${missionId}/stream?since_tick=${sinceTick}`);
  }
}

export interface SseEvent {
  id?: string;
  event: string;
  data: string;
}

// Parse the text/event-stream wire format: blank-line separated blocks of
// `field: value` lines. Tolerates partial trailing blocks (returned as rest).
export function parseSseChunk(buffer: string): { events: SseEvent[]; rest: string } {
  const events: SseEvent[] = [];
  const blocks = buffer.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    const event: SseEvent = { event: "message", data: "" };
    const dataLines: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith("id:")) event.id = line.slice(3).trim();
      else if (line.startsWith("event:")) event.event = line.slice(6).trim();
      else if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
    }
    event.data = dataLines.join("\n");
    if (event.data || event.event !== "message") events.push(event);
  }
  return { events, rest };
}

export interface FeedSubscription {
  items: FeedItem[];
  lastTick: number; // resume cursor: next connect uses lastTick + 1
  disconnects: number;
  done: boolean;
}

export type StreamSource = (url: string) => AsyncIterable<string>;

// Consume the explanation stream, reconnecting with since_tick resume so a
// drop produces neither duplicated nor missing cards.
export async function subscribeFeed(
  client: ServiceClient,
  missionId: string,
  source: StreamSource,
  onItem: (item: FeedItem) => void,
  maxReconnects = 5,
): Promise<FeedSubscription> {
  const subscription: FeedSubscription = {
    items: [],
    lastTick: -1,
    disconnects: 0,
    done: false,
  };
  while (!subscription.done && subscription.disconnects <= maxReconnects) {
    const url = client.streamUrl(missionId, subscription.lastTick + 1);
    let buffer = "";
    let sawEnd = false;
    try {
      for await (const chunk of source(url)) {
        buffer += chunk;
        const { events, rest } = parseSseChunk(buffer);
        buffer = rest;
        for (const event of events) {
          if (event.event === "end") {
            sawEnd = true;
            break;
          }
          if (event.event !== "concept_set") continue;
          const item = JSON.parse(event.data) as FeedItem;
          subscription.items.push(item);
          subscription.lastTick = item.entry.time.tick;
          onItem(item);
        }
        if (sawEnd) break;
      }
    } catch {
      subscription.disconnects += 1;
      continue;
    }
    if (sawEnd) {
      subscription.done = true;
    } else {
      subscription.disconnects += 1;
    }
  }
  return subscription;
}
