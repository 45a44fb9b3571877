pub mod fcl;
pub mod adsl;
pub mod amhost;
pub mod exec;
pub mod fcdsl;
pub mod loopgen;
pub mod online;
pub mod runtime;
pub mod scenarios;
pub mod testgen;
