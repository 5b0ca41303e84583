use crate::ans::Message;
use crate::Result;

/// A stack-like codec: `decode` inverts `encode` on the same message.
///
/// Encoding and decoding mutate the message in place. A sequence of encodes
/// must be undone by the corresponding decodes in reverse order.
pub trait Codec {
    type Symbol;

    fn encode(&self, m: &mut Message, x: &Self::Symbol) -> Result<()>;

    fn decode(&self, m: &mut Message) -> Result<Self::Symbol>;

    /// Exact information content of `x` under this codec's (quantized) model,
    /// if the model can report it without touching a message.
    fn bits(&self, _x: &Self::Symbol) -> Option<f64> {
        None
    }
}

impl<C: Codec + ?Sized> Codec for &C {
    type Symbol = C::Symbol;

    fn encode(&self, m: &mut Message, x: &Self::Symbol) -> Result<()> {
        (**self).encode(m, x)
    }

    fn decode(&self, m: &mut Message) -> Result<Self::Symbol> {
        (**self).decode(m)
    }

    fn bits(&self, x: &Self::Symbol) -> Option<f64> {
        (**self).bits(x)
    }
}

/// Codes a fixed number of symbols independently with the same codec.
#[derive(Clone, Debug)]
pub struct Iid<C> {
    pub item: C,
    pub len: usize,
}

impl<C> Iid<C> {
    pub fn new(item: C, len: usize) -> Self {
        Self { item, len }
    }
}

impl<C: Codec> Codec for Iid<C> {
    type Symbol = Vec<C::Symbol>;

    fn encode(&self, m: &mut Message, x: &Self::Symbol) -> Result<()> {
        if x.len() != self.len {
            return Err(crate::Error::Parameter(format!(
                "expected {} symbols, got {}",
                self.len,
                x.len()
            )));
        }
        for s in x.iter().rev() {
            self.item.encode(m, s)?;
        }
        Ok(())
    }

    fn decode(&self, m: &mut Message) -> Result<Self::Symbol> {
        (0..self.len).map(|_| self.item.decode(m)).collect()
    }

    fn bits(&self, x: &Self::Symbol) -> Option<f64> {
        x.iter().map(|s| self.item.bits(s)).sum()
    }
}
