/**
 * Dispute desk: anyone raises, negotiators rule. The resolve affordance is
 * gated on the session role, mirroring the chain's authorization table —
 * the chain remains the enforcer.
 */

import type { ApiClient, DisputeJson, SubmitResult } from "../api.js";
import type { SessionIdentity } from "../session.js";

export class DisputeDeskModel {
  open: DisputeJson[] = [];

  constructor(
    private api: ApiClient,
    private session: SessionIdentity | null = null,
  ) {}

  get canResolve(): boolean {
    return this.session?.role === "negotiator";
  }

  async refresh(): Promise<DisputeJson[]> {
    this.open = await this.api.disputes("open");
    return this.open;
  }

  async raise(subject: string, respondent: string, claim: string): Promise<SubmitResult> {
    if (!this.session) return { accepted: false, code: "NoSession" };
    const tx = await this.session.buildTransaction({
      kind: "raise_dispute",
      subject,
      respondent,
      claim,
    });
    return this.api.submit(tx);
  }

  async resolve(disputeId: string, ruledAgainst: string): Promise<SubmitResult> {
    if (!this.session) return { accepted: false, code: "NoSession" };
    if (!this.canResolve) return { accepted: false, code: "RoleForbidden" };
    const tx = await this.session.buildTransaction({
      kind: "resolve_dispute",
      dispute_id: disputeId,
      ruled_against: ruledAgainst,
    });
    return this.api.submit(tx);
  }
}
