//! Pairwise homomorphic aggregation of sensor ciphertexts along a binary
//! tree.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::counters::OpCounts;
use crate::gaussian::GaussianInt;
use crate::paillier::{GPaillierCiphertext, PaillierPublicKey};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeShape {
    /// Leaves padded to a power of two with fresh encryptions of 0 + 0i.
    #[default]
    Padded,
    /// An odd node at any level is carried up unchanged.
    Unbalanced,
}

/// A partial sum handed from one sensor to another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub level: u32,
    /// 0-based sensor indices.
    pub from: usize,
    pub to: usize,
    pub ciphertext: GPaillierCiphertext,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeOutcome {
    pub root: GPaillierCiphertext,
    /// Sensor holding the root, which forwards it to the data collector.
    pub root_owner: usize,
    pub levels: u32,
    pub transfers: Vec<Transfer>,
    pub padding_leaves: usize,
}

impl TreeOutcome {
    pub fn message_count(&self) -> usize {
        self.transfers.len()
    }
}

#[derive(Debug)]
enum Node {
    Owned { owner: usize, ct: GPaillierCiphertext },
    /// A subtree made only of padding leaves, not yet encrypted.
    Padding(usize),
}

/// ⌈log₂ n⌉ for `n ≥ 1`.
pub fn tree_levels(n: usize) -> u32 {
    debug_assert!(n >= 1);
    usize::BITS - (n - 1).leading_zeros()
}

/// Side effects of aggregation that belong to the parties: encrypting the
/// padding zeros and moving partial sums between sensors.
pub trait TreeHooks {
    /// A fresh encryption of 0 + 0i made by sensor `owner`.
    fn encrypt_zero(&mut self, owner: usize) -> Result<GPaillierCiphertext>;
    /// Sends `transfer` and returns the ciphertext as it arrived.
    fn transfer(&mut self, transfer: &Transfer) -> Result<GPaillierCiphertext>;
}

/// Hooks for a single process: one RNG for all padding, lossless transfers.
pub struct LocalHooks<'a, R: RngCore> {
    pub public: &'a PaillierPublicKey,
    pub rng: &'a mut R,
    pub padding: OpCounts,
}

impl<R: RngCore> TreeHooks for LocalHooks<'_, R> {
    fn encrypt_zero(&mut self, _owner: usize) -> Result<GPaillierCiphertext> {
        self.public.encrypt_gauss(&GaussianInt::zero(), self.rng, &mut self.padding)
    }

    fn transfer(&mut self, transfer: &Transfer) -> Result<GPaillierCiphertext> {
        Ok(transfer.ciphertext.clone())
    }
}

/// Sums `leaves` (leaf `j` owned by sensor `j`) level by level. The left
/// child's owner aggregates each pair; a pair whose right side is all
/// padding is completed locally by that owner, who encrypts one zero per
/// padding leaf.
pub fn tree_aggregate(
    leaves: Vec<GPaillierCiphertext>,
    public: &PaillierPublicKey,
    shape: TreeShape,
    hooks: &mut dyn TreeHooks,
) -> Result<TreeOutcome> {
    if leaves.is_empty() {
        return Err(Error::Domain("tree aggregation needs at least one ciphertext".into()));
    }
    let n = leaves.len();
    let mut nodes: Vec<Node> = leaves
        .into_iter()
        .enumerate()
        .map(|(owner, ct)| Node::Owned { owner, ct })
        .collect();
    let padding_leaves = match shape {
        TreeShape::Padded => n.next_power_of_two() - n,
        TreeShape::Unbalanced => 0,
    };
    nodes.extend((0..padding_leaves).map(|_| Node::Padding(1)));

    let mut transfers = Vec::new();
    let mut level = 0;
    while nodes.len() > 1 {
        level += 1;
        let mut next = Vec::with_capacity(nodes.len().div_ceil(2));
        let mut iter = nodes.into_iter();
        while let Some(left) = iter.next() {
            let Some(right) = iter.next() else {
                next.push(left);
                break;
            };
            let merged = match (left, right) {
                (Node::Owned { owner, ct: l }, Node::Owned { owner: from, ct: r }) => {
                    let t = Transfer {
                        level,
                        from,
                        to: owner,
                        ciphertext: r,
                    };
                    let received = hooks.transfer(&t)?;
                    transfers.push(t);
                    Node::Owned {
                        owner,
                        ct: public.add_gauss(&l, &received),
                    }
                }
                (Node::Owned { owner, ct }, Node::Padding(k)) | (Node::Padding(k), Node::Owned { owner, ct }) => {
                    let mut acc = ct;
                    for _ in 0..k {
                        acc = public.add_gauss(&acc, &hooks.encrypt_zero(owner)?);
                    }
                    Node::Owned { owner, ct: acc }
                }
                (Node::Padding(a), Node::Padding(b)) => Node::Padding(a + b),
            };
            next.push(merged);
        }
        nodes = next;
    }
    let Some(Node::Owned { owner, ct }) = nodes.pop() else {
        unreachable!("a tree with a real leaf ends in an owned root")
    };
    Ok(TreeOutcome {
        root: ct,
        root_owner: owner,
        levels: level,
        transfers,
        padding_leaves,
    })
}
