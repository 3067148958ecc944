/**
 * A participant identity: role, actor id, and a client-side signing key.
 * Key material is imported into a non-extractable WebCrypto key; the
 * console signs locally and only ever transmits signed transactions.
 */

import { hexToBytes, bytesToHex } from "./hex.js";
import { importSigningKey, sha256, sign } from "./crypto.js";
import { signedPreimage, bodyJson, type RoleName, type TxBodyValue } from "./codec.js";

export interface KeyFile {
  role: string;
  display_name: string;
  actor_id: string;
  public_key: string;
  private_key: string;
}

export interface WireTransaction extends Record<string, unknown> {
  kind: string;
  body: Record<string, unknown>;
  signer: string;
  signature: string;
  tx_id: string;
}

export class SessionIdentity {
  private constructor(
    public readonly actorId: string,
    public readonly role: RoleName,
    public readonly displayName: string,
    public readonly publicKeyHex: string,
    private readonly signingKey: CryptoKey,
  ) {}

  static async fromKeyFile(file: KeyFile): Promise<SessionIdentity> {
    const seed = hexToBytes(file.private_key);
    const signingKey = await importSigningKey(seed);
    const derivedId = bytesToHex(await sha256(hexToBytes(file.public_key)));
    if (file.actor_id && file.actor_id !== derivedId) {
      throw new Error("key file actor_id does not match its public key");
    }
    return new SessionIdentity(
      derivedId,
      file.role as RoleName,
      file.display_name ?? "",
      file.public_key,
      signingKey,
    );
  }

  /** Build, id, and sign a transaction entirely client-side. */
  async buildTransaction(body: TxBodyValue): Promise<WireTransaction> {
    const preimage = signedPreimage(body, this.actorId);
    const txId = await sha256(preimage);
    const signature = await sign(this.signingKey, txId);
    return {
      kind: body.kind,
      body: bodyJson(body),
      signer: this.actorId,
      signature: bytesToHex(signature),
      tx_id: bytesToHex(txId),
    };
  }
}
