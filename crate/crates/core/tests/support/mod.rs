pub mod table1;
