//! Fixture doctrines: the subobject and localic doctrines of finite sets,
//! the subobject doctrine of the arrow category, closed-subobject doctrines,
//! and the writer that turns any of them into explicit tables.

mod arrow;
mod closure;
mod generate;
mod localic;
mod materialize;

pub use arrow::{ArrowMor, ArrowObj, ArrowPresheaf};
pub use closure::{
    bidense_morphisms, check_naturality, check_nucleus, closed_subobject_doctrine, dense_orthogonal_objects,
    ClosedDoctrine, ClosureError, ClosureOperator,
};
pub use generate::{
    algebra_named, gen_fixture, generate, plant, FixtureError, FixtureSpec, Generated, ALGEBRAS, CLOSURES, DEFECTS,
    FIXTURES,
};
pub use localic::LocalicDoctrine;
pub use materialize::{materialize, MaterializeOptions};
