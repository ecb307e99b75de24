// Top-level console view-model: one mission subscription feeding the
// timeline plus a what-if panel seeded from the latest live state.

import { ServiceClient, subscribeFeed, type StreamSource } from "./client.js";
import { appendToTimeline, emptyTimeline, type TimelineModel } from "./timeline.js";
import { WhatIfPanel } from "./whatif.js";
import type { FeedItem, VocabularyPayload } from "./types.js";

export class ConsoleViewModel {
  timeline: TimelineModel = emptyTimeline();
  connectionLost = false;
  missionId: string | null = null;
  panel: WhatIfPanel | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly source: StreamSource,
  ) {}

  async openMission(missionId: string): Promise<void> {
    this.missionId = missionId;
    this.timeline = emptyTimeline();
    const subscription = await subscribeFeed(
      this.client,
      missionId,
      this.source,
      (item: FeedItem) => {
        this.timeline = appendToTimeline(this.timeline, item);
      },
    );
    this.connectionLost = !subscription.done;
  }

  async openWhatif(vocabulary?: VocabularyPayload): Promise<WhatIfPanel> {
    if (!this.missionId) throw new Error("open a mission first");
    const vocab = vocabulary ?? (await this.client.vocabulary());
    const latest = await this.client.missionState(this.missionId);
    this.panel = new WhatIfPanel(this.client, vocab, latest.state, latest.vessel);
    return this.panel;
  }
}
