//! Name-keyed registries of interchangeable strategies.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Strategies of one family, looked up by name at run time. Registration
/// order is kept so listings are stable.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Add or replace the entry called `name`.
    pub fn register(&mut self, name: impl Into<String>, item: Arc<T>) -> &mut Self {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name, item)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, item)| Arc::clone(item))
            .ok_or_else(|| Error::Unknown {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<T>)> {
        self.entries.iter().map(|(n, item)| (n.as_str(), item))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Shape {
        fn area(&self) -> f64;
    }
    struct Square(f64);
    impl Shape for Square {
        fn area(&self) -> f64 {
            self.0 * self.0
        }
    }

    #[test]
    fn lookup_and_replace() {
        let mut r: Registry<dyn Shape> = Registry::new("shape");
        r.register("unit", Arc::new(Square(1.0)));
        r.register("two", Arc::new(Square(2.0)));
        assert_eq!(r.get("two").unwrap().area(), 4.0);
        r.register("two", Arc::new(Square(3.0)));
        assert_eq!(r.get("two").unwrap().area(), 9.0);
        assert_eq!(r.names(), vec!["unit", "two"]);
        match r.get("three") {
            Err(Error::Unknown { kind, known, .. }) => {
                assert_eq!(kind, "shape");
                assert_eq!(known, "unit, two");
            }
            _ => panic!("expected unknown-name error"),
        }
    }
}
