//! The storage components of the datapath: stack, byte memory, key/value
//! storage, bytecode memory and the program counter.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ErrorKind, VmError};
use crate::opcode::{immediate_len, op};
use crate::word::Word256;

pub const STACK_LIMIT: usize = 1024;
pub const MEMORY_SIZE: usize = 2768;
pub const STORAGE_CAPACITY: usize = 1024;
pub const BYTECODE_CAPACITY: usize = 32768;
pub const PC_BITS: u32 = 15;

/// LIFO stack of at most 1024 words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stack {
    items: Vec<Word256>,
}

impl Stack {
    pub fn new() -> Self {
        Self { items: Vec::with_capacity(64) }
    }

    pub fn depth(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items bottom-first; the last element is the top.
    pub fn as_slice(&self) -> &[Word256] {
        &self.items
    }

    pub fn top(&self) -> Option<Word256> {
        self.items.last().copied()
    }

    pub fn push(&mut self, w: Word256) -> Result<(), VmError> {
        if self.items.len() >= STACK_LIMIT {
            return Err(VmError::new(ErrorKind::StackOverflow, format!("stack full at depth {STACK_LIMIT}")));
        }
        self.items.push(w);
        Ok(())
    }

    pub fn pop(&mut self) -> Result<Word256, VmError> {
        self.items
            .pop()
            .ok_or_else(|| VmError::new(ErrorKind::StackUnderflow, "pop on empty stack"))
    }

    /// Item `n` from the top (1 = top) without removing it.
    pub fn peek(&self, n: usize) -> Result<Word256, VmError> {
        if n == 0 || n > self.items.len() {
            return Err(VmError::new(
                ErrorKind::StackUnderflow,
                format!("need depth {n}, have {}", self.items.len()),
            ));
        }
        Ok(self.items[self.items.len() - n])
    }

    /// DUPn: push a copy of the n-th item.
    pub fn dup(&mut self, n: usize) -> Result<(), VmError> {
        let w = self.peek(n)?;
        self.push(w)
    }

    /// SWAPn: exchange the top with the (n+1)-th item.
    pub fn swap(&mut self, n: usize) -> Result<(), VmError> {
        let len = self.items.len();
        if n == 0 || n + 1 > len {
            return Err(VmError::new(ErrorKind::StackUnderflow, format!("swap{n} needs depth {}, have {len}", n + 1)));
        }
        self.items.swap(len - 1, len - 1 - n);
        Ok(())
    }

    pub fn require(&self, depth: usize) -> Result<(), VmError> {
        if self.items.len() < depth {
            return Err(VmError::new(
                ErrorKind::StackUnderflow,
                format!("need depth {depth}, have {}", self.items.len()),
            ));
        }
        Ok(())
    }
}

/// Fixed-capacity byte-addressable memory.
///
/// Writes are 1 or 32 bytes wide; reads are 32 bytes wide. Region reads are
/// assembled from successive 32-byte fetches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memory {
    bytes: Vec<u8>,
    /// Highest byte touched, rounded up to a 32-byte boundary (MSIZE).
    active: usize,
}

impl Default for Memory {
    fn default() -> Self {
        Self::new()
    }
}

impl Memory {
    pub fn new() -> Self {
        Self::with_capacity(MEMORY_SIZE)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self { bytes: vec![0; capacity], active: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.bytes.len()
    }

    /// Bytes touched so far, rounded up to a multiple of 32.
    pub fn active_len(&self) -> usize {
        self.active
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    fn check(&self, offset: usize, len: usize) -> Result<(), VmError> {
        match offset.checked_add(len) {
            Some(end) if end <= self.bytes.len() => Ok(()),
            _ => Err(VmError::new(
                ErrorKind::MemoryOutOfRange,
                format!("access [{offset}, {offset}+{len}) exceeds {} bytes", self.bytes.len()),
            )),
        }
    }

    fn touch(&mut self, offset: usize, len: usize) {
        if len > 0 {
            let end = (offset + len).div_ceil(32) * 32;
            self.active = self.active.max(end);
        }
    }

    pub fn store32(&mut self, offset: usize, w: Word256) -> Result<(), VmError> {
        self.check(offset, 32)?;
        self.bytes[offset..offset + 32].copy_from_slice(&w.to_be_bytes());
        self.touch(offset, 32);
        Ok(())
    }

    pub fn store8(&mut self, offset: usize, b: u8) -> Result<(), VmError> {
        self.check(offset, 1)?;
        self.bytes[offset] = b;
        self.touch(offset, 1);
        Ok(())
    }

    pub fn load32(&mut self, offset: usize) -> Result<Word256, VmError> {
        let chunk = self.fetch32(offset)?;
        self.touch(offset, 32);
        Ok(Word256::from_be_bytes(chunk))
    }

    /// One 32-byte read port access. A fetch that runs past the end of the
    /// array is an error, except when the bytes past the end are never
    /// consumed; see [`Memory::read_region`].
    fn fetch32(&self, offset: usize) -> Result<[u8; 32], VmError> {
        self.check(offset, 32)?;
        let mut out = [0u8; 32];
        out.copy_from_slice(&self.bytes[offset..offset + 32]);
        Ok(out)
    }

    /// `size` bytes starting at `offset`, as successive 32-byte fetches with the
    /// last one truncated. A zero-size read never faults.
    pub fn read_region(&mut self, offset: usize, size: usize) -> Result<Vec<u8>, VmError> {
        if size == 0 {
            return Ok(Vec::new());
        }
        self.check(offset, size)?;
        let mut out = Vec::with_capacity(size);
        let mut cursor = offset;
        while out.len() < size {
            let want = (size - out.len()).min(32);
            if want == 32 {
                out.extend_from_slice(&self.fetch32(cursor)?);
            } else {
                // Tail fetch: the window may extend past capacity; only the
                // in-range prefix is kept.
                let end = (cursor + 32).min(self.bytes.len());
                out.extend_from_slice(&self.bytes[cursor..end][..want]);
            }
            cursor += want;
        }
        self.touch(offset, size);
        Ok(out)
    }

    /// Writes `data` using 32-byte writes for full chunks and 1-byte writes for the tail.
    pub fn write_region(&mut self, offset: usize, data: &[u8]) -> Result<(), VmError> {
        if data.is_empty() {
            return Ok(());
        }
        self.check(offset, data.len())?;
        let mut chunks = data.chunks_exact(32);
        let mut cursor = offset;
        for chunk in &mut chunks {
            let mut w = [0u8; 32];
            w.copy_from_slice(chunk);
            self.store32(cursor, Word256::from_be_bytes(w))?;
            cursor += 32;
        }
        for b in chunks.remainder() {
            self.store8(cursor, *b)?;
            cursor += 1;
        }
        Ok(())
    }
}

/// Storage addressing policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StorageMode {
    /// Associative map with a 1024-key capacity.
    #[default]
    Associative,
    /// Direct-mapped RAM indexed by the low 10 key bits; colliding keys alias.
    HwFaithful,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Slots {
    Map(BTreeMap<Word256, Word256>),
    Direct(Vec<Option<(Word256, Word256)>>),
}

/// Key/value word storage, 1024 entries deep. Unwritten keys read as zero.
///
/// In associative mode, writing zero removes the key and frees its slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Storage {
    slots: Slots,
    collisions: u64,
}

impl Default for Storage {
    fn default() -> Self {
        Self::new(StorageMode::Associative)
    }
}

impl Storage {
    pub fn new(mode: StorageMode) -> Self {
        let slots = match mode {
            StorageMode::Associative => Slots::Map(BTreeMap::new()),
            StorageMode::HwFaithful => Slots::Direct(vec![None; STORAGE_CAPACITY]),
        };
        Self { slots, collisions: 0 }
    }

    pub fn mode(&self) -> StorageMode {
        match self.slots {
            Slots::Map(_) => StorageMode::Associative,
            Slots::Direct(_) => StorageMode::HwFaithful,
        }
    }

    fn index(key: &Word256) -> usize {
        (key.low_u64() as usize) & (STORAGE_CAPACITY - 1)
    }

    /// Accesses in direct-mapped mode that hit a slot owned by a different key.
    pub fn collisions(&self) -> u64 {
        self.collisions
    }

    pub fn load(&mut self, key: Word256) -> Word256 {
        match &self.slots {
            Slots::Map(m) => m.get(&key).copied().unwrap_or(Word256::ZERO),
            Slots::Direct(d) => match d[Self::index(&key)] {
                Some((owner, value)) => {
                    if owner != key {
                        self.collisions += 1;
                    }
                    value
                }
                None => Word256::ZERO,
            },
        }
    }

    pub fn store(&mut self, key: Word256, value: Word256) -> Result<(), VmError> {
        match &mut self.slots {
            Slots::Map(m) => {
                if value.is_zero() {
                    m.remove(&key);
                    return Ok(());
                }
                if m.len() >= STORAGE_CAPACITY && !m.contains_key(&key) {
                    return Err(VmError::new(
                        ErrorKind::StorageCapacityExceeded,
                        format!("key {key} would be entry {} of {STORAGE_CAPACITY}", STORAGE_CAPACITY + 1),
                    ));
                }
                m.insert(key, value);
            }
            Slots::Direct(d) => {
                let slot = &mut d[Self::index(&key)];
                if let Some((owner, _)) = slot {
                    if *owner != key {
                        self.collisions += 1;
                    }
                }
                *slot = Some((key, value));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match &self.slots {
            Slots::Map(m) => m.len(),
            Slots::Direct(d) => d.iter().filter(|s| s.is_some()).count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Non-zero entries, sorted by key.
    pub fn entries(&self) -> Vec<(Word256, Word256)> {
        let mut out: Vec<_> = match &self.slots {
            Slots::Map(m) => m.iter().map(|(k, v)| (*k, *v)).collect(),
            Slots::Direct(d) => d.iter().flatten().copied().collect(),
        };
        out.retain(|(_, v)| !v.is_zero());
        out.sort();
        out
    }
}

/// Read-only program memory with precomputed jump destinations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BytecodeMemory {
    code: Vec<u8>,
    jumpdests: Vec<bool>,
}

impl BytecodeMemory {
    pub fn load(code: &[u8]) -> Result<Self, VmError> {
        if code.len() > BYTECODE_CAPACITY {
            return Err(VmError::new(
                ErrorKind::BytecodeTooLarge,
                format!("{} bytes exceeds {BYTECODE_CAPACITY}", code.len()),
            ));
        }
        let mut jumpdests = vec![false; code.len()];
        let mut i = 0;
        while i < code.len() {
            let b = code[i];
            if b == op::JUMPDEST {
                jumpdests[i] = true;
            }
            i += 1 + immediate_len(b);
        }
        Ok(Self { code: code.to_vec(), jumpdests })
    }

    pub fn code(&self) -> &[u8] {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Byte at `offset`; reads past the end yield STOP.
    pub fn fetch(&self, offset: usize) -> u8 {
        self.code.get(offset).copied().unwrap_or(op::STOP)
    }

    pub fn is_jumpdest(&self, offset: usize) -> bool {
        self.jumpdests.get(offset).copied().unwrap_or(false)
    }

    pub fn jumpdests(&self) -> impl Iterator<Item = usize> + '_ {
        self.jumpdests.iter().enumerate().filter(|(_, &d)| d).map(|(i, _)| i)
    }

    /// `len` bytes from `offset`, zero-padded past the end of the code.
    pub fn slice_padded(&self, offset: usize, len: usize) -> Vec<u8> {
        let mut out = vec![0u8; len];
        if offset < self.code.len() {
            let avail = (self.code.len() - offset).min(len);
            out[..avail].copy_from_slice(&self.code[offset..offset + avail]);
        }
        out
    }
}

/// 15-bit program counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProgramCounter(u16);

impl ProgramCounter {
    pub const LIMIT: usize = 1 << PC_BITS;

    pub fn value(&self) -> usize {
        self.0 as usize
    }

    /// Sequential advance. Returns `false` when the next offset leaves the
    /// 15-bit range, which the executor treats as falling off the code.
    pub fn advance(&mut self, by: usize) -> bool {
        let next = self.0 as usize + by;
        if next >= Self::LIMIT {
            return false;
        }
        self.0 = next as u16;
        true
    }

    /// Load from the stack for JUMP/JUMPI.
    pub fn set(&mut self, target: Word256, bcm: &BytecodeMemory) -> Result<(), VmError> {
        let t = match target.to_usize() {
            Some(t) if t < Self::LIMIT => t,
            _ => {
                return Err(VmError::new(
                    ErrorKind::InvalidJump,
                    format!("target {target} exceeds the {PC_BITS}-bit program counter"),
                ))
            }
        };
        if !bcm.is_jumpdest(t) {
            return Err(VmError::new(ErrorKind::InvalidJump, format!("offset {t} is not a JUMPDEST")));
        }
        self.0 = t as u16;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: u64) -> Word256 {
        Word256::from_u64(v)
    }

    #[test]
    fn stack_lifo_and_limits() {
        let mut s = Stack::new();
        s.push(w(5)).unwrap();
        assert_eq!(s.pop().unwrap(), w(5));
        assert_eq!(s.pop().unwrap_err().kind, ErrorKind::StackUnderflow);
        for i in 0..1024 {
            s.push(w(i)).unwrap();
        }
        assert_eq!(s.push(w(0)).unwrap_err().kind, ErrorKind::StackOverflow);
        assert_eq!(s.dup(1).unwrap_err().kind, ErrorKind::StackOverflow);
    }

    #[test]
    fn dup_and_swap() {
        let mut s = Stack::new();
        s.push(w(1)).unwrap();
        s.push(w(2)).unwrap();
        s.swap(1).unwrap();
        assert_eq!(s.as_slice(), &[w(2), w(1)]);
        s.swap(1).unwrap();
        assert_eq!(s.as_slice(), &[w(1), w(2)]);
        s.dup(1).unwrap();
        assert_eq!(s.as_slice(), &[w(1), w(2), w(2)]);
        let mut short = Stack::new();
        short.push(w(1)).unwrap();
        short.push(w(2)).unwrap();
        assert_eq!(short.dup(3).unwrap_err().kind, ErrorKind::StackUnderflow);
        assert_eq!(short.swap(2).unwrap_err().kind, ErrorKind::StackUnderflow);
    }

    #[test]
    fn memory_bounds() {
        let mut m = Memory::new();
        let v = Word256::MAX.shr(3);
        m.store32(0, v).unwrap();
        assert_eq!(m.load32(0).unwrap(), v);
        assert_eq!(m.store32(2752, v).unwrap_err().kind, ErrorKind::MemoryOutOfRange);
        m.store32(2736, v).unwrap();
        m.store8(2767, 1).unwrap();
        assert_eq!(m.store8(2768, 1).unwrap_err().kind, ErrorKind::MemoryOutOfRange);
        assert_eq!(m.load32(2737).unwrap_err().kind, ErrorKind::MemoryOutOfRange);
        assert_eq!(m.store32(usize::MAX - 4, v).unwrap_err().kind, ErrorKind::MemoryOutOfRange);
    }

    #[test]
    fn store8_layout() {
        let mut m = Memory::new();
        m.store8(0, 0xab).unwrap();
        let bytes = m.load32(0).unwrap().to_be_bytes();
        assert_eq!(bytes[0], 0xab);
        assert!(bytes[1..].iter().all(|b| *b == 0));
    }

    #[test]
    fn region_reads() {
        let mut m = Memory::new();
        assert!(m.read_region(0, 0).unwrap().is_empty());
        assert!(m.read_region(5000, 0).unwrap().is_empty());
        for i in 0..10u8 {
            m.store8(i as usize, i).unwrap();
        }
        assert_eq!(m.read_region(2, 5).unwrap(), [2, 3, 4, 5, 6]);
        assert_eq!(m.read_region(2760, 16).unwrap_err().kind, ErrorKind::MemoryOutOfRange);
        assert_eq!(m.read_region(2760, 8).unwrap().len(), 8);
        let data: Vec<u8> = (0..70).collect();
        m.write_region(100, &data).unwrap();
        assert_eq!(m.read_region(100, 70).unwrap(), data);
    }

    #[test]
    fn msize_tracks_touched_words() {
        let mut m = Memory::new();
        assert_eq!(m.active_len(), 0);
        m.store8(0, 1).unwrap();
        assert_eq!(m.active_len(), 32);
        m.load32(40).unwrap();
        assert_eq!(m.active_len(), 96);
    }

    #[test]
    fn storage_capacity() {
        let mut st = Storage::default();
        assert_eq!(st.load(w(9)), Word256::ZERO);
        st.store(w(9), w(1)).unwrap();
        assert_eq!(st.load(w(9)), w(1));
        for k in 0..1023 {
            st.store(w(1000 + k), w(1)).unwrap();
        }
        assert_eq!(st.len(), 1024);
        st.store(w(9), w(2)).unwrap();
        let err = st.store(w(5), w(1)).unwrap_err();
        assert_eq!(err.kind, ErrorKind::StorageCapacityExceeded);
        st.store(w(9), Word256::ZERO).unwrap();
        st.store(w(5), w(1)).unwrap();
    }

    #[test]
    fn hw_faithful_storage_aliases() {
        let mut st = Storage::new(StorageMode::HwFaithful);
        st.store(w(1), w(11)).unwrap();
        st.store(w(1 + 1024), w(22)).unwrap();
        assert_eq!(st.collisions(), 1);
        assert_eq!(st.load(w(1)), w(22));
        assert_eq!(st.collisions(), 2);
        for k in 0..5000 {
            st.store(w(k), w(k + 1)).unwrap();
        }
        assert_eq!(st.len(), 1024);
    }

    #[test]
    fn jumpdest_scan() {
        let b = BytecodeMemory::load(&[0x5b]).unwrap();
        assert_eq!(b.jumpdests().collect::<Vec<_>>(), [0]);
        let b = BytecodeMemory::load(&[0x60, 0x5b, 0x5b]).unwrap();
        assert_eq!(b.jumpdests().collect::<Vec<_>>(), [2]);
        let err = BytecodeMemory::load(&vec![0; BYTECODE_CAPACITY + 1]).unwrap_err();
        assert_eq!(err.kind, ErrorKind::BytecodeTooLarge);
        assert!(BytecodeMemory::load(&vec![0; BYTECODE_CAPACITY]).is_ok());
    }

    #[test]
    fn pc_jumps() {
        let b = BytecodeMemory::load(&[0x60, 0x5b, 0x5b]).unwrap();
        let mut pc = ProgramCounter::default();
        pc.set(w(2), &b).unwrap();
        assert_eq!(pc.value(), 2);
        assert_eq!(pc.set(w(1), &b).unwrap_err().kind, ErrorKind::InvalidJump);
        assert_eq!(pc.set(w(40_000), &b).unwrap_err().kind, ErrorKind::InvalidJump);
        assert_eq!(pc.set(Word256::MAX, &b).unwrap_err().kind, ErrorKind::InvalidJump);
        assert_eq!(pc.value(), 2);
        assert!(!ProgramCounter::default().advance(ProgramCounter::LIMIT));
    }

    // Independent reference: walk the code with an explicit "skip" counter.
    fn reference_jumpdests(code: &[u8]) -> Vec<usize> {
        let mut out = Vec::new();
        let mut skip = 0usize;
        for (i, &b) in code.iter().enumerate() {
            if skip > 0 {
                skip -= 1;
                continue;
            }
            if b == 0x5b {
                out.push(i);
            }
            if (0x60..=0x7f).contains(&b) {
                skip = (b - 0x5f) as usize;
            }
        }
        out
    }

    proptest::proptest! {
        #[test]
        fn jumpdests_match_reference(code in proptest::collection::vec(
            proptest::prop_oneof![proptest::num::u8::ANY, proptest::strategy::Just(0x5bu8), 0x60u8..=0x7f],
            0..400,
        )) {
            let b = BytecodeMemory::load(&code).unwrap();
            proptest::prop_assert_eq!(b.jumpdests().collect::<Vec<_>>(), reference_jumpdests(&code));
        }

        #[test]
        fn stack_matches_list_model(ops in proptest::collection::vec(proptest::option::of(proptest::num::u64::ANY), 0..3000)) {
            let mut s = Stack::new();
            let mut model: Vec<Word256> = Vec::new();
            for o in ops {
                match o {
                    Some(v) => {
                        let r = s.push(w(v));
                        if model.len() < STACK_LIMIT {
                            proptest::prop_assert!(r.is_ok());
                            model.push(w(v));
                        } else {
                            proptest::prop_assert_eq!(r.unwrap_err().kind, ErrorKind::StackOverflow);
                        }
                    }
                    None => {
                        let r = s.pop();
                        match model.pop() {
                            Some(m) => proptest::prop_assert_eq!(r.unwrap(), m),
                            None => proptest::prop_assert_eq!(r.unwrap_err().kind, ErrorKind::StackUnderflow),
                        }
                    }
                }
                proptest::prop_assert_eq!(s.as_slice(), &model[..]);
            }
        }

        #[test]
        fn memory_store_load_identity(off in 0usize..(MEMORY_SIZE - 32), bytes in proptest::array::uniform32(proptest::num::u8::ANY)) {
            let mut m = Memory::new();
            let v = Word256::from_be_bytes(bytes);
            m.store32(off, v).unwrap();
            proptest::prop_assert_eq!(m.load32(off).unwrap(), v);
        }

        #[test]
        fn disjoint_writes_commute(a in 0usize..1000, b in 1100usize..2700, x in proptest::num::u64::ANY, y in proptest::num::u8::ANY) {
            let mut m1 = Memory::new();
            let mut m2 = Memory::new();
            m1.store32(a, w(x)).unwrap();
            m1.store8(b, y).unwrap();
            m2.store8(b, y).unwrap();
            m2.store32(a, w(x)).unwrap();
            proptest::prop_assert_eq!(m1, m2);
        }

        #[test]
        fn storage_last_write_wins(writes in proptest::collection::vec((0u64..20, 0u64..5), 0..100)) {
            let mut st = Storage::default();
            let mut model = BTreeMap::new();
            for (k, v) in writes {
                st.store(w(k), w(v)).unwrap();
                model.insert(k, v);
            }
            for (k, v) in model {
                proptest::prop_assert_eq!(st.load(w(k)), w(v));
            }
        }
    }
}
