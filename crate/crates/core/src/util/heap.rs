//! Addressable binary max-heap over dense element ids.

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct IndexedMaxHeap<K> {
    heap: Vec<(K, u32)>,
    position: Vec<usize>,
}

impl<K: Ord + Copy> IndexedMaxHeap<K> {
    pub fn new(capacity: usize) -> Self {
        Self {
            heap: Vec::new(),
            position: vec![ABSENT; capacity],
        }
    }

    #[inline]
    pub fn contains(&self, id: u32) -> bool {
        self.position[id as usize] != ABSENT
    }

    pub fn key(&self, id: u32) -> Option<K> {
        match self.position[id as usize] {
            ABSENT => None,
            pos => Some(self.heap[pos].0),
        }
    }

    pub fn peek(&self) -> Option<(u32, K)> {
        self.heap.first().map(|&(k, id)| (id, k))
    }

    pub fn push(&mut self, id: u32, key: K) {
        debug_assert!(!self.contains(id));
        let pos = self.heap.len();
        self.heap.push((key, id));
        self.position[id as usize] = pos;
        self.sift_up(pos);
    }

    /// Inserts `id` or changes its key.
    pub fn set(&mut self, id: u32, key: K) {
        match self.position[id as usize] {
            ABSENT => self.push(id, key),
            pos => {
                let old = self.heap[pos].0;
                self.heap[pos].0 = key;
                if key > old {
                    self.sift_up(pos);
                } else {
                    self.sift_down(pos);
                }
            }
        }
    }

    pub fn pop(&mut self) -> Option<(u32, K)> {
        let top = self.peek()?;
        self.remove(top.0);
        Some(top)
    }

    pub fn remove(&mut self, id: u32) {
        let pos = self.position[id as usize];
        if pos == ABSENT {
            return;
        }
        let last = self.heap.len() - 1;
        self.swap(pos, last);
        self.heap.pop();
        self.position[id as usize] = ABSENT;
        if pos < self.heap.len() {
            self.sift_up(pos);
            self.sift_down(pos);
        }
    }

    pub fn clear(&mut self) {
        for &(_, id) in &self.heap {
            self.position[id as usize] = ABSENT;
        }
        self.heap.clear();
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.position[self.heap[a].1 as usize] = a;
        self.position[self.heap[b].1 as usize] = b;
    }

    fn sift_up(&mut self, mut pos: usize) {
        while pos > 0 {
            let parent = (pos - 1) / 2;
            if self.heap[pos].0 > self.heap[parent].0 {
                self.swap(pos, parent);
                pos = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut pos: usize) {
        let len = self.heap.len();
        loop {
            let left = 2 * pos + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && self.heap[right].0 > self.heap[left].0 {
                right
            } else {
                left
            };
            if self.heap[child].0 > self.heap[pos].0 {
                self.swap(pos, child);
                pos = child;
            } else {
                break;
            }
        }
    }
}
