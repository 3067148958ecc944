/**
 * Client-side merkle proof checking: the console re-verifies every trace
 * anchor against fetched block headers instead of trusting the node's word.
 * Leaves hash with a 0x00 prefix and interior nodes with 0x01, matching the
 * chain's domain separation.
 */

import { sha256 } from "./crypto.js";
import { bytesEqual, concat, hexToBytes } from "./hex.js";

export interface ProofStep {
  sibling: string; // hex digest
  side: "left" | "right";
}

export interface MerkleProofJson {
  leaf: string;
  path: ProofStep[];
  root: string;
}

export interface AnchorJson {
  tx_id: string;
  block_height: number;
  proof: MerkleProofJson;
}

const LEAF_PREFIX = Uint8Array.of(0);
const NODE_PREFIX = Uint8Array.of(1);

export async function foldProof(proof: MerkleProofJson): Promise<Uint8Array> {
  let current = await sha256(concat(LEAF_PREFIX, hexToBytes(proof.leaf)));
  for (const step of proof.path) {
    const sibling = hexToBytes(step.sibling);
    current =
      step.side === "left"
        ? await sha256(concat(NODE_PREFIX, sibling, current))
        : await sha256(concat(NODE_PREFIX, current, sibling));
  }
  return current;
}

export async function verifyProof(proof: MerkleProofJson): Promise<boolean> {
  try {
    const folded = await foldProof(proof);
    return bytesEqual(folded, hexToBytes(proof.root));
  } catch {
    return false;
  }
}

/**
 * Verify one anchor against the merkle root claimed by the header at its
 * height. `headerRoots` maps block height -> merkle_root hex.
 */
export async function verifyAnchor(
  anchor: AnchorJson,
  headerRoots: Map<number, string>,
): Promise<boolean> {
  const expectedRoot = headerRoots.get(anchor.block_height);
  if (expectedRoot === undefined) return false;
  if (anchor.proof.leaf !== anchor.tx_id) return false;
  if (anchor.proof.root !== expectedRoot) return false;
  return verifyProof(anchor.proof);
}
