use serde::{Deserialize, Serialize};

use super::PolyError;

/// Lattice site index.
pub type Site = i32;

/// Finite closed interval of lattice sites `[lo, hi]` standing in for ℤ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteWindow {
    lo: Site,
    hi: Site,
}

impl SiteWindow {
    pub fn new(lo: Site, hi: Site) -> Result<Self, PolyError> {
        if lo > hi {
            return Err(PolyError::InvalidWindow {
                lo: lo as i64,
                hi: hi as i64,
            });
        }
        Ok(Self { lo, hi })
    }

    /// The symmetric window `[-half_width, half_width]`.
    pub fn symmetric(half_width: Site) -> Result<Self, PolyError> {
        Self::new(-half_width, half_width)
    }

    pub fn lo(&self) -> Site {
        self.lo
    }

    pub fn hi(&self) -> Site {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: Site) -> bool {
        site >= self.lo && site <= self.hi
    }

    pub fn offset(&self, site: Site) -> usize {
        debug_assert!(self.contains(site));
        (site - self.lo) as usize
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + Clone {
        self.lo..=self.hi
    }

    /// Smallest window containing both.
    pub fn hull(&self, other: &SiteWindow) -> SiteWindow {
        SiteWindow {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn contains_window(&self, other: &SiteWindow) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// The barrier `A(j₀, w) = [j₀ − w, j₀ + w] ∪ [−j₀ − w, −j₀ + w]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Barrier {
    pub j0: Site,
    pub half_width: i64,
}

impl Barrier {
    pub fn new(j0: Site, half_width: i64) -> Self {
        Self { j0, half_width }
    }

    pub fn contains(&self, site: Site) -> bool {
        if self.half_width < 0 {
            return false;
        }
        let s = site as i64;
        let j0 = self.j0 as i64;
        (s - j0).abs() <= self.half_width || (s + j0).abs() <= self.half_width
    }

    /// Smallest window holding both barrier intervals.
    pub fn hull(&self) -> Option<SiteWindow> {
        if self.half_width < 0 {
            return None;
        }
        let reach = self.j0.unsigned_abs() as i64 + self.half_width;
        let reach = Site::try_from(reach).ok()?;
        SiteWindow::new(-reach, reach).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_membership() {
        let a = Barrier::new(10, 5);
        for s in 5..=15 {
            assert!(a.contains(s) && a.contains(-s));
        }
        assert!(!a.contains(0) && !a.contains(1) && !a.contains(16) && !a.contains(-4));
        assert!(Barrier::new(3, 0).contains(3));
        assert!(!Barrier::new(3, -1).contains(3));
    }

    #[test]
    fn empty_window_rejected() {
        assert!(SiteWindow::new(1, 0).is_err());
        assert_eq!(SiteWindow::new(-2, 2).unwrap().len(), 5);
    }
}
