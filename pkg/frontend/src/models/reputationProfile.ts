/** Actor profile: identity, role, and the informational reputation score. */

import type { ActorJson, ApiClient } from "../api.js";

export interface ReputationView {
  actor: ActorJson;
  score: number; // parsed from the node's 6-decimal string
  band: "high" | "neutral" | "low";
}

export class ReputationProfileModel {
  constructor(private api: ApiClient) {}

  async load(actorId: string): Promise<ReputationView> {
    const actor = await this.api.actor(actorId);
    const score = Number.parseFloat(actor.reputation);
    return {
      actor,
      score,
      band: score >= 0.65 ? "high" : score <= 0.35 ? "low" : "neutral",
    };
  }
}
