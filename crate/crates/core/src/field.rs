//! Coefficient vectors for the three discrete spaces.
//!
//! All fields are indexed by the global numbering of the underlying
//! [`RectMesh`](crate::mesh::RectMesh): nodes, edges or elements. Entries
//! belonging to inactive parts of a masked mesh are carried along and hold
//! zero.

use std::ops::{Deref, DerefMut};

macro_rules! field_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn zeros(n: usize) -> Self {
                Self(vec![0.0; n])
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }
    };
}

field_newtype!(
    /// Nodal values of a continuous bilinear function, `v = sum v_j psi_j`.
    NodalField
);
field_newtype!(
    /// Normal-flux coefficients of a lowest-order Raviart-Thomas field, one per edge.
    EdgeFluxField
);
field_newtype!(
    /// Piecewise-constant values, one per element.
    ElementField
);
