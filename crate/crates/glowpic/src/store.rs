//! Preallocated structure-of-arrays particle storage.
//!
//! All buffers are sized once at startup (`capacity = capacity_factor *
//! n_init`); particle creation claims slots through a single shared atomic
//! cursor instead of reallocating or reshuffling. A particle is dead iff
//! its weight is zero; dead slots are reclaimed by [`ParticleStore::compact`],
//! which the driver triggers once the dead fraction passes 25% of the live
//! count.

use std::marker::PhantomData;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Index of the cached cell id in the per-particle aux row.
pub const AUX_CELL: usize = 0;
/// Index of the cached kinetic energy (eV) in the aux row.
pub const AUX_ENERGY: usize = 1;
/// Per-step collision tag: `0` for none, `1 + channel` for an event.
pub const AUX_TAG: usize = 2;
/// Spare aux slot (kept for layout parity with the 4-wide scratch array).
pub const AUX_SPARE: usize = 3;

/// Fixed chunk width used by the deterministic parallel paths. Results are
/// independent of thread count because chunk boundaries depend only on the
/// particle count.
pub const CHUNK: usize = 4096;

/// Structure-of-arrays electron ensemble.
///
/// Rows `[0, len)` are occupied (live or dead); `[len, capacity)` is spare
/// room for particle creation. `stream` carries the particle's RNG stream
/// id, which follows it through compaction.
pub struct ParticleStore {
    pos: Vec<[f64; 3]>,
    vel: Vec<[f64; 3]>,
    weight: Vec<f64>,
    aux: Vec<[f64; 4]>,
    stream: Vec<u64>,
    cursor: AtomicUsize,
    dead: usize,
    w0: f64,
}

impl ParticleStore {
    /// Create an empty store with room for `capacity` particles.
    ///
    /// `w0` is the single global macro-weight; all live particles carry it.
    pub fn with_capacity(capacity: usize, w0: f64) -> Self {
        Self {
            pos: vec![[0.0; 3]; capacity],
            vel: vec![[0.0; 3]; capacity],
            weight: vec![0.0; capacity],
            aux: vec![[0.0; 4]; capacity],
            stream: vec![0; capacity],
            cursor: AtomicUsize::new(0),
            dead: 0,
            w0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.pos.len()
    }

    /// Number of occupied slots (live + dead), i.e. the append cursor.
    pub fn len(&self) -> usize {
        self.cursor.load(Ordering::Acquire)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn live_count(&self) -> usize {
        self.len() - self.dead
    }

    pub fn dead_count(&self) -> usize {
        self.dead
    }

    pub fn macro_weight(&self) -> f64 {
        self.w0
    }

    pub fn pos(&self) -> &[[f64; 3]] {
        &self.pos[..self.len()]
    }

    pub fn vel(&self) -> &[[f64; 3]] {
        &self.vel[..self.len()]
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight[..self.len()]
    }

    pub fn aux(&self) -> &[[f64; 4]] {
        &self.aux[..self.len()]
    }

    pub fn stream(&self) -> &[u64] {
        &self.stream[..self.len()]
    }

    pub fn vel_mut(&mut self) -> &mut [[f64; 3]] {
        let n = self.len();
        &mut self.vel[..n]
    }

    pub fn pos_mut(&mut self) -> &mut [[f64; 3]] {
        let n = self.len();
        &mut self.pos[..n]
    }

    pub fn aux_mut(&mut self) -> &mut [[f64; 4]] {
        let n = self.len();
        &mut self.aux[..n]
    }

    /// Append one particle, claiming the next slot from the shared cursor.
    ///
    /// The stream id defaults to the slot index; use [`Self::append_with`]
    /// when the caller manages streams (e.g. secondaries).
    pub fn append(&mut self, pos: [f64; 3], vel: [f64; 3], weight: f64) -> Result<usize> {
        let idx = self.reserve()?;
        self.pos[idx] = pos;
        self.vel[idx] = vel;
        self.weight[idx] = weight;
        self.aux[idx] = [0.0; 4];
        self.stream[idx] = idx as u64;
        if weight == 0.0 {
            self.dead += 1;
        }
        Ok(idx)
    }

    /// Append with explicit aux scratch and stream id.
    pub fn append_with(
        &mut self,
        pos: [f64; 3],
        vel: [f64; 3],
        weight: f64,
        aux: [f64; 4],
        stream: u64,
    ) -> Result<usize> {
        let idx = self.reserve()?;
        self.pos[idx] = pos;
        self.vel[idx] = vel;
        self.weight[idx] = weight;
        self.aux[idx] = aux;
        self.stream[idx] = stream;
        if weight == 0.0 {
            self.dead += 1;
        }
        Ok(idx)
    }

    fn reserve(&self) -> Result<usize> {
        let cap = self.capacity();
        self.cursor
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |c| {
                if c < cap {
                    Some(c + 1)
                } else {
                    None
                }
            })
            .map_err(|_| Error::CapacityExhausted { capacity: cap })
    }

    /// Kill particle `l` (sets its weight to zero).
    pub fn kill(&mut self, l: usize) {
        if self.weight[l] != 0.0 {
            self.weight[l] = 0.0;
            self.dead += 1;
        }
    }

    /// Record `n` deaths performed through raw slot writes.
    pub fn note_deaths(&mut self, n: usize) {
        self.dead += n;
    }

    /// Sum of all weights over occupied slots.
    pub fn total_weight(&self) -> f64 {
        self.weight[..self.len()].iter().sum()
    }

    /// Dead fraction relative to the live count.
    pub fn dead_fraction(&self) -> f64 {
        let live = self.live_count();
        if live == 0 {
            if self.dead > 0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            self.dead as f64 / live as f64
        }
    }

    /// Move all live particles to the front, preserving their order.
    ///
    /// Survivor rows are bit-copied, so every physical quantity (including
    /// the total weight) is unchanged exactly.
    pub fn compact(&mut self) {
        let n = self.len();
        let mut k = 0usize;
        for l in 0..n {
            if self.weight[l] != 0.0 {
                if k != l {
                    self.pos[k] = self.pos[l];
                    self.vel[k] = self.vel[l];
                    self.weight[k] = self.weight[l];
                    self.aux[k] = self.aux[l];
                    self.stream[k] = self.stream[l];
                }
                k += 1;
            }
        }
        for l in k..n {
            self.weight[l] = 0.0;
        }
        self.cursor.store(k, Ordering::Release);
        self.dead = 0;
    }

    /// Canonicalize the ordering of slots `[from, len)` by stream id.
    ///
    /// Particle creation through the shared cursor can land secondaries in
    /// scheduling-dependent slots; sorting the freshly created tail by its
    /// (deterministic) stream ids makes the post-step state independent of
    /// thread interleaving.
    pub fn canonicalize_tail(&mut self, from: usize) {
        let n = self.len();
        if n.saturating_sub(from) < 2 {
            return;
        }
        let mut order: Vec<usize> = (from..n).collect();
        order.sort_by_key(|&l| self.stream[l]);
        let pos: Vec<_> = order.iter().map(|&l| self.pos[l]).collect();
        let vel: Vec<_> = order.iter().map(|&l| self.vel[l]).collect();
        let weight: Vec<_> = order.iter().map(|&l| self.weight[l]).collect();
        let aux: Vec<_> = order.iter().map(|&l| self.aux[l]).collect();
        let stream: Vec<_> = order.iter().map(|&l| self.stream[l]).collect();
        self.pos[from..n].copy_from_slice(&pos);
        self.vel[from..n].copy_from_slice(&vel);
        self.weight[from..n].copy_from_slice(&weight);
        self.aux[from..n].copy_from_slice(&aux);
        self.stream[from..n].copy_from_slice(&stream);
    }

    /// Split the store into per-chunk mutable views of the occupied region
    /// plus an appender over the spare region.
    ///
    /// Chunks are `CHUNK`-sized windows in slot order; kernels iterate them
    /// sequentially or in parallel with identical results as long as they
    /// only write through their own chunk and the appender.
    pub fn split_for_step(&mut self) -> (Vec<LiveChunk<'_>>, Appender<'_>) {
        let n = self.len();
        let cap = self.capacity();

        let (pos_live, pos_spare) = self.pos.split_at_mut(n);
        let (vel_live, vel_spare) = self.vel.split_at_mut(n);
        let (w_live, w_spare) = self.weight.split_at_mut(n);
        let (aux_live, aux_spare) = self.aux.split_at_mut(n);
        let (stream_live, stream_spare) = self.stream.split_at_mut(n);

        let appender = Appender {
            base: n,
            cap,
            cursor: &self.cursor,
            pos: pos_spare.as_mut_ptr(),
            vel: vel_spare.as_mut_ptr(),
            weight: w_spare.as_mut_ptr(),
            aux: aux_spare.as_mut_ptr(),
            stream: stream_spare.as_mut_ptr(),
            _lt: PhantomData,
        };

        let mut chunks = Vec::with_capacity(n.div_ceil(CHUNK));
        let (mut p, mut v, mut w, mut a, mut s) =
            (pos_live, vel_live, w_live, aux_live, stream_live);
        let mut base = 0usize;
        while !p.is_empty() {
            let take = p.len().min(CHUNK);
            let (p0, p1) = p.split_at_mut(take);
            let (v0, v1) = v.split_at_mut(take);
            let (w0, w1) = w.split_at_mut(take);
            let (a0, a1) = a.split_at_mut(take);
            let (s0, s1) = s.split_at_mut(take);
            chunks.push(LiveChunk {
                base,
                pos: p0,
                vel: v0,
                weight: w0,
                aux: a0,
                stream: s0,
            });
            base += take;
            p = p1;
            v = v1;
            w = w1;
            a = a1;
            s = s1;
        }

        (chunks, appender)
    }

    /// Raw per-slot writer for kernels whose write sets are disjoint by
    /// construction (unique pair members, unique popped catalytes).
    pub fn slot_writer(&mut self) -> SlotWriter<'_> {
        let n = self.len();
        SlotWriter {
            len: n,
            pos: self.pos.as_mut_ptr(),
            vel: self.vel.as_mut_ptr(),
            weight: self.weight.as_mut_ptr(),
            aux: self.aux.as_mut_ptr(),
            _lt: PhantomData,
        }
    }
}

/// Mutable view of one chunk of occupied slots. `base` is the absolute
/// index of row 0 of the chunk.
pub struct LiveChunk<'a> {
    pub base: usize,
    pub pos: &'a mut [[f64; 3]],
    pub vel: &'a mut [[f64; 3]],
    pub weight: &'a mut [f64],
    pub aux: &'a mut [[f64; 4]],
    pub stream: &'a mut [u64],
}

impl LiveChunk<'_> {
    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }
}

/// Shared handle for particle creation during a kernel.
///
/// Each successful append claims a unique slot index via an atomic
/// fetch-and-increment of the store cursor; concurrent appends never alias.
/// Appends past the capacity fail with `CapacityExhausted` and leave the
/// cursor at the capacity.
pub struct Appender<'a> {
    base: usize,
    cap: usize,
    cursor: &'a AtomicUsize,
    pos: *mut [f64; 3],
    vel: *mut [f64; 3],
    weight: *mut f64,
    aux: *mut [f64; 4],
    stream: *mut u64,
    _lt: PhantomData<&'a mut [f64]>,
}

// The appender writes only to slots it has exclusively claimed from the
// atomic cursor, all within the spare region it holds a unique borrow of.
unsafe impl Send for Appender<'_> {}
unsafe impl Sync for Appender<'_> {}

impl Appender<'_> {
    pub fn append(
        &self,
        pos: [f64; 3],
        vel: [f64; 3],
        weight: f64,
        aux: [f64; 4],
        stream: u64,
    ) -> Result<usize> {
        let idx = self
            .cursor
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |c| {
                if c < self.cap {
                    Some(c + 1)
                } else {
                    None
                }
            })
            .map_err(|_| Error::CapacityExhausted { capacity: self.cap })?;
        let rel = idx - self.base;
        unsafe {
            *self.pos.add(rel) = pos;
            *self.vel.add(rel) = vel;
            *self.weight.add(rel) = weight;
            *self.aux.add(rel) = aux;
            *self.stream.add(rel) = stream;
        }
        Ok(idx)
    }

    /// Number of appends performed so far in this step phase.
    pub fn appended(&self) -> usize {
        self.cursor.load(Ordering::Acquire) - self.base
    }
}

/// Unsynchronized indexed writer over the occupied region.
///
/// Used by the Coulomb and recombination collision phases, where write
/// targets are provably disjoint (a particle belongs to at most one pair;
/// a catalyte is popped at most once).
pub struct SlotWriter<'a> {
    len: usize,
    pos: *mut [f64; 3],
    vel: *mut [f64; 3],
    weight: *mut f64,
    aux: *mut [f64; 4],
    _lt: PhantomData<&'a mut [f64]>,
}

unsafe impl Send for SlotWriter<'_> {}
unsafe impl Sync for SlotWriter<'_> {}

impl SlotWriter<'_> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// # Safety
    /// No other thread may read or write slot `l` concurrently.
    pub unsafe fn set_vel(&self, l: usize, v: [f64; 3]) {
        debug_assert!(l < self.len);
        *self.vel.add(l) = v;
    }

    /// # Safety
    /// No other thread may read or write slot `l` concurrently.
    pub unsafe fn set_weight(&self, l: usize, w: f64) {
        debug_assert!(l < self.len);
        *self.weight.add(l) = w;
    }

    /// # Safety
    /// No other thread may write slot `l` concurrently.
    pub unsafe fn read_vel(&self, l: usize) -> [f64; 3] {
        debug_assert!(l < self.len);
        *self.vel.add(l)
    }

    /// # Safety
    /// No other thread may write slot `l` concurrently.
    pub unsafe fn read_pos(&self, l: usize) -> [f64; 3] {
        debug_assert!(l < self.len);
        *self.pos.add(l)
    }

    /// # Safety
    /// No other thread may read or write slot `l` concurrently.
    pub unsafe fn set_aux(&self, l: usize, k: usize, v: f64) {
        debug_assert!(l < self.len && k < 4);
        (*self.aux.add(l))[k] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_append_gets_slot_zero() {
        let mut s = ParticleStore::with_capacity(4, 1.0);
        let idx = s.append([0.1, 0.0, 0.0], [1.0, 2.0, 3.0], 1.0).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(s.live_count(), 1);
    }

    #[test]
    fn append_at_capacity_fails() {
        let mut s = ParticleStore::with_capacity(2, 1.0);
        s.append([0.0; 3], [0.0; 3], 1.0).unwrap();
        s.append([0.0; 3], [0.0; 3], 1.0).unwrap();
        match s.append([0.0; 3], [0.0; 3], 1.0) {
            Err(Error::CapacityExhausted { capacity }) => assert_eq!(capacity, 2),
            other => panic!("expected CapacityExhausted, got {other:?}"),
        }
        // Cursor must not overshoot.
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn concurrent_appends_form_a_permutation() {
        let threads = 4;
        let per_thread = 500;
        let total = threads * per_thread;
        let mut s = ParticleStore::with_capacity(total, 1.0);
        let (_chunks, appender) = s.split_for_step();

        let mut claimed: Vec<Vec<usize>> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads {
                let app = &appender;
                handles.push(scope.spawn(move || {
                    let mut got = Vec::with_capacity(per_thread);
                    for k in 0..per_thread {
                        let marker = (t * per_thread + k) as f64;
                        let idx = app
                            .append([marker, 0.0, 0.0], [0.0; 3], 1.0, [0.0; 4], marker as u64)
                            .unwrap();
                        got.push((idx, marker));
                    }
                    got
                }));
            }
            for h in handles {
                claimed.push(h.join().unwrap().into_iter().map(|(i, _)| i).collect());
            }
        });

        let mut all: Vec<usize> = claimed.into_iter().flatten().collect();
        all.sort_unstable();
        let want: Vec<usize> = (0..total).collect();
        assert_eq!(all, want);
        assert_eq!(s.len(), total);
        // Data landed where the returned index said it would.
        for l in 0..total {
            assert_eq!(s.pos()[l][0] as u64, s.stream()[l]);
        }
    }

    #[test]
    fn concurrent_appends_respect_capacity() {
        let mut s = ParticleStore::with_capacity(100, 1.0);
        let (_chunks, appender) = s.split_for_step();
        let failures = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for _ in 0..4 {
                let app = &appender;
                handles.push(scope.spawn(move || {
                    let mut fails = 0usize;
                    for _ in 0..50 {
                        if app.append([0.0; 3], [0.0; 3], 1.0, [0.0; 4], 0).is_err() {
                            fails += 1;
                        }
                    }
                    fails
                }));
            }
            handles.into_iter().map(|h| h.join().unwrap()).sum::<usize>()
        });
        assert_eq!(failures, 100);
        assert_eq!(s.len(), 100);
    }

    #[test]
    fn compact_keeps_survivors_in_order() {
        let mut s = ParticleStore::with_capacity(8, 1.0);
        for i in 0..3 {
            s.append([i as f64, 0.0, 0.0], [0.0; 3], 1.0).unwrap();
        }
        s.kill(1);
        s.compact();
        assert_eq!(s.live_count(), 2);
        assert_eq!(s.len(), 2);
        assert_eq!(s.pos()[0][0], 0.0);
        assert_eq!(s.pos()[1][0], 2.0);
    }

    #[test]
    fn compact_all_dead() {
        let mut s = ParticleStore::with_capacity(4, 1.0);
        s.append([0.0; 3], [0.0; 3], 1.0).unwrap();
        s.append([0.0; 3], [0.0; 3], 1.0).unwrap();
        s.kill(0);
        s.kill(1);
        s.compact();
        assert_eq!(s.live_count(), 0);
        assert_eq!(s.len(), 0);
    }

    #[test]
    fn compact_no_dead_is_identity() {
        let mut s = ParticleStore::with_capacity(4, 1.0);
        s.append([0.5, 0.0, 0.0], [1.0, -2.0, 0.25], 1.0).unwrap();
        s.append([0.75, 0.0, 0.0], [3.0, 4.0, -5.0], 1.0).unwrap();
        let pos_before = s.pos().to_vec();
        let vel_before = s.vel().to_vec();
        s.compact();
        assert_eq!(s.pos(), &pos_before[..]);
        assert_eq!(s.vel(), &vel_before[..]);
    }

    #[test]
    fn compact_conserves_total_weight_bitwise() {
        let mut s = ParticleStore::with_capacity(64, 0.5);
        let rng = crate::rng::CounterRng::new(5);
        for i in 0..40 {
            s.append([0.0; 3], [0.0; 3], 0.5).unwrap();
            if rng.uniform(i, 0, 0) < 0.3 {
                s.kill(i as usize);
            }
        }
        let before = s.total_weight();
        s.compact();
        let after = s.total_weight();
        assert_eq!(before.to_bits(), after.to_bits());
    }

    #[test]
    fn tail_canonicalization_sorts_by_stream() {
        let mut s = ParticleStore::with_capacity(8, 1.0);
        s.append([0.0; 3], [0.0; 3], 1.0).unwrap();
        s.append_with([1.0, 0.0, 0.0], [0.0; 3], 1.0, [0.0; 4], 90).unwrap();
        s.append_with([2.0, 0.0, 0.0], [0.0; 3], 1.0, [0.0; 4], 30).unwrap();
        s.append_with([3.0, 0.0, 0.0], [0.0; 3], 1.0, [0.0; 4], 60).unwrap();
        s.canonicalize_tail(1);
        assert_eq!(s.stream()[1..], [30, 60, 90]);
        assert_eq!(s.pos()[1][0], 2.0);
        assert_eq!(s.pos()[2][0], 3.0);
        assert_eq!(s.pos()[3][0], 1.0);
    }
}
