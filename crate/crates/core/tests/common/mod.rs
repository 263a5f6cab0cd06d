pub mod jw;
